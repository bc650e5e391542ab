#pragma once

// Perturbed cross-sections, graph competitors over the cone sheets and the
// measured epiperimetric gap.
//
// A sheet is a unit half circle (from l through v to -l) or a great circle,
// parametrized as gamma(theta) = cos(theta) e1 + sin(theta) e2. Its
// perturbation adds a normal field V and projects back to the sphere:
//   Z(theta) = (gamma + V) / |gamma + V|.
// The graph competitor uses the same construction with V scaled by r^(k-1)
// mode by mode, so its radial profile r^k is harmonic in each mode.

#include "conelab/cone_net.hpp"
#include "conelab/decompose.hpp"
#include "conelab/parallel.hpp"
#include "conelab/param_mesh.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace conelab {

struct EpiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// a * mode(k theta) along normal direction `normal` of the sheet.
struct ModeTerm {
  int normal = 0;
  int k = 2;
  double a = 0.0;
  bool cosine = false;
};

/// One list of terms per sheet: half-planes first, then interior planes.
using ModeTable = std::vector<std::vector<ModeTerm>>;

struct EpiOptions {
  double epsilon = 0.05;      // admissibility threshold for (ii)-(iv)
  int samples = 128;          // rim samples per half circle
  int rings = 32;             // radial rings of the competitor meshes
  double hausdorff_h = 0.005;
  bool lp_flat = false;       // also run the (slower, looser) LP bound and keep the smaller
  double trivial_tol = 1e-8;
  double fill_constant = 1.0; // isoperimetric fill: mass <= C (cycle mass)^2
};

struct SheetFrame {
  Point e1, e2;
  Eigen::MatrixXd normals;  // d x (d-2), orthonormal complement of (e1, e2)
  bool half = true;
  long long mult = 1;
};

inline std::vector<SheetFrame> sheet_frames(const ConeSpec& spec) {
  validate(spec);
  const int d = spec.ambient_dim();
  auto frame = [d](const Point& a, const Point& b, bool half, long long mult) {
    SheetFrame f;
    const Eigen::MatrixXd e = detail::orthonormal_span(a, b);
    f.e1 = e.col(0);
    f.e2 = e.col(1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(e);
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    f.normals = full.rightCols(d - 2);
    f.half = half;
    f.mult = mult;
    return f;
  };
  std::vector<SheetFrame> out;
  for (const auto& h : spec.halfplanes) out.push_back(frame(spec.line, h.v, true, h.mult));
  for (const auto& p : spec.interior_planes) out.push_back(frame(p.a, p.b, false, p.mult));
  return out;
}

/// Sample angles shared by Z and the rim of every competitor mesh.
inline std::vector<double> sheet_angles(const SheetFrame& f, int samples) {
  return uniform_angles(f.half ? samples : 2 * samples, f.half);
}

/// Point of the graph competitor over the sheet at polar (r, theta); r = 1
/// gives Z(theta).
inline Point sheet_point(const SheetFrame& f, const std::vector<ModeTerm>& terms, double r, double theta) {
  if (f.half && (theta == 0.0 || theta == std::numbers::pi)) return (theta == 0.0 ? r : -r) * f.e1;
  Point x = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
  for (const auto& t : terms) {
    const double mode = t.cosine ? std::cos(t.k * theta) : std::sin(t.k * theta);
    x += t.a * std::pow(r, t.k - 1) * mode * f.normals.col(t.normal);
  }
  return r * x.normalized();
}

inline void validate_modes(const std::vector<SheetFrame>& frames, const ModeTable& table) {
  if (!table.empty() && table.size() != frames.size()) throw EpiError("mode table needs one entry per sheet");
  for (std::size_t s = 0; s < table.size(); ++s)
    for (const auto& t : table[s]) {
      if (t.k < 1) throw EpiError("mode index must be at least 1");
      if (t.normal < 0 || t.normal >= frames[s].normals.cols()) throw EpiError("normal index out of range");
      if (frames[s].half && t.cosine) throw EpiError("half-circle sheets take sine modes only (endpoints are pinned)");
      if (!std::isfinite(t.a)) throw EpiError("non-finite amplitude");
    }
}

/// Random table: every requested mode on every normal direction of every
/// sheet, amplitude uniform in [-amp, amp]. Full circles get sine and cosine.
inline ModeTable random_modes(const ConeSpec& spec, const std::vector<int>& ks, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  ModeTable table;
  for (const auto& f : sheet_frames(spec)) {
    std::vector<ModeTerm> terms;
    for (int k : ks)
      for (int j = 0; j < f.normals.cols(); ++j) {
        terms.push_back({j, k, u(rng), false});
        if (!f.half) terms.push_back({j, k, u(rng), true});
      }
    table.push_back(std::move(terms));
  }
  return table;
}

/// Single half-plane sheet l = e1, v = e2 in R^(n+2).
inline ConeSpec single_half_plane(int n = 2) {
  ConeSpec s;
  s.n = n;
  s.line = Point::Unit(n + 2, 0);
  s.halfplanes.push_back({Point::Unit(n + 2, 1), 1});
  s.case_tag = ConeCase::OpenBook;
  return s;
}

// ---------------------------------------------------------------------------
// Perturbed cross-sections.

namespace detail {

inline Point slerp(const Point& a, const Point& b, double t) {
  const double phi = sphere_angle(a, b);
  if (phi < 1e-15) return a;
  return (std::sin((1.0 - t) * phi) * a + std::sin(t * phi) * b) / std::sin(phi);
}

}  // namespace detail

/// Area of the geodesic homotopy between two chains whose arcs correspond
/// one to one (same coefficients, same order): every point of the i-th arc
/// of `r` moves along the great circle to the matching point of `z`. When
/// dZ = dR this surface has boundary Z - R, so its area bounds the flat
/// distance from above. Gauss-Legendre in both directions.
inline double paired_homotopy_area(const SphericalChain& z, const SphericalChain& r) {
  if (z.arcs.size() != r.arcs.size()) throw EpiError("homotopy bound needs paired arcs");
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  double area = 0.0;
  for (std::size_t i = 0; i < z.arcs.size(); ++i) {
    const auto& az = z.arcs[i];
    const auto& ar = r.arcs[i];
    if (az.coefficient() != ar.coefficient()) throw EpiError("homotopy bound needs equal coefficients");
    auto at = [&](double s, double t) { return detail::slerp(arc_point(ar.arc, s), arc_point(az.arc, s), t); };
    double a = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double s = 0.5 * (gx[j] + 1.0);
      for (int k = 0; k < 4; ++k) {
        const double t = 0.5 * (gx[k] + 1.0), h = 1e-6;
        const Point xs = (at(std::min(1.0, s + h), t) - at(std::max(0.0, s - h), t)) / (std::min(1.0, s + h) - std::max(0.0, s - h));
        const Point xt = (at(s, std::min(1.0, t + h)) - at(s, std::max(0.0, t - h))) / (std::min(1.0, t + h) - std::max(0.0, t - h));
        const double g = xs.squaredNorm() * xt.squaredNorm() - std::pow(xs.dot(xt), 2);
        a += 0.25 * gw[j] * gw[k] * std::sqrt(std::max(0.0, g));
      }
    }
    area += static_cast<double>(std::llabs(az.coefficient())) * a;
  }
  return area;
}

struct PerturbedSection {
  ConeSpec spec;
  SphericalChain r;
  ModeTable modes;
  SphericalChain z;
  std::array<double, 4> eps{};  // |boundary mismatch|, flat bound, mass gap, Hausdorff
  bool admissible = false;
  std::string violation;
  int violated = -1;
  EpiOptions options;
};

inline SphericalChain perturbed_chain(const std::vector<SheetFrame>& frames, const ModeTable& table, int samples) {
  SphericalChain z;
  static const std::vector<ModeTerm> none;
  for (std::size_t s = 0; s < frames.size(); ++s) {
    const auto& f = frames[s];
    const auto& terms = table.empty() ? none : table[s];
    const auto th = sheet_angles(f, samples);
    std::vector<Point> pts;
    for (double t : th) pts.push_back(sheet_point(f, terms, 1.0, t));
    if (!f.half) pts.push_back(pts.front());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      z.add(make_arc(pts[i], pts[i + 1]), std::llabs(f.mult), f.mult > 0 ? 1 : -1);
  }
  return z;
}

/// Builds Z and measures the four admissibility quantities; `violation`
/// names the first failed condition.
inline PerturbedSection measure_perturbation(const ConeSpec& spec, const ModeTable& table, const EpiOptions& opt = {}) {
  if (opt.samples < 8 || opt.rings < 2) throw EpiError("too few samples for a perturbation");
  PerturbedSection p;
  p.spec = spec;
  p.modes = table;
  p.options = opt;
  const auto frames = sheet_frames(spec);
  validate_modes(frames, table);
  p.z = perturbed_chain(frames, table, opt.samples);
  p.r = perturbed_chain(frames, {}, opt.samples);

  SphericalChain diff = p.z;
  for (const auto& a : p.r.arcs) diff.add(a.arc, a.multiplicity, -a.orientation);
  for (const auto& [pt, c] : spherical_boundary(diff)) p.eps[0] += static_cast<double>(std::llabs(c));
  p.eps[1] = paired_homotopy_area(p.z, p.r);
  if (opt.lp_flat) p.eps[1] = std::min(p.eps[1], spherical_flat_upper(p.z, p.r).value);
  p.eps[2] = p.z.mass() - p.r.mass();
  p.eps[3] = hausdorff_distance(p.z, p.r, opt.hausdorff_h);

  const char* names[] = {"(i) boundary", "(ii) flat distance", "(iii) mass gap", "(iv) support distance"};
  for (int i = 0; i < 4; ++i) {
    const bool ok = i == 0 ? p.eps[0] == 0.0 : p.eps[i] <= opt.epsilon;
    if (!ok && p.violated < 0) {
      p.violated = i;
      p.violation = names[i];
    }
  }
  p.admissible = p.violation.empty();
  return p;
}

inline PerturbedSection make_perturbation(const ConeSpec& spec, const ModeTable& table, const EpiOptions& opt = {}) {
  PerturbedSection p = measure_perturbation(spec, table, opt);
  if (!p.admissible)
    throw EpiError("inadmissible perturbation: condition " + p.violation + " = " + std::to_string(p.eps[p.violated]));
  return p;
}

// ---------------------------------------------------------------------------
// Competitors. All three fills share one polar mesh per sheet, so chord and
// ring discretization errors cancel in the excess differences.

struct CompetitorTrio {
  Chain h;     // graph competitor
  Chain cone;  // cone over Z (flat triangles on the same mesh)
  Chain s;     // the cone S itself
};

namespace detail {

template <class Position>
Chain sheet_fill(const PerturbedSection& p, Position pos) {
  const auto frames = sheet_frames(p.spec);
  ChainBuilder b(p.spec.ambient_dim(), 2);
  static const std::vector<ModeTerm> none;
  for (std::size_t s = 0; s < frames.size(); ++s) {
    const auto& f = frames[s];
    const auto& terms = p.modes.empty() ? none : p.modes[s];
    const auto rim = sheet_angles(f, p.options.samples);
    const int seg = f.half ? p.options.samples : 2 * p.options.samples;
    const ParamMesh m = polar_mesh_with_rim(rim, p.options.rings, seg, f.half);
    std::vector<int> ids;
    for (std::size_t i = 0; i < m.points.size(); ++i) ids.push_back(b.add_vertex(pos(f, terms, m.radius[i], m.angle[i])));
    for (const auto& t : m.triangles) b.add({ids[t[0]], ids[t[1]], ids[t[2]]}, f.mult);
  }
  return b.build();
}

}  // namespace detail

inline CompetitorTrio competitor_trio(const PerturbedSection& p) {
  static const std::vector<ModeTerm> none;
  CompetitorTrio out;
  out.h = detail::sheet_fill(p, [](const SheetFrame& f, const std::vector<ModeTerm>& t, double r, double th) {
    return sheet_point(f, t, r, th);
  });
  out.cone = detail::sheet_fill(p, [](const SheetFrame& f, const std::vector<ModeTerm>& t, double r, double th) {
    return Point(r * sheet_point(f, t, 1.0, th));
  });
  out.s = detail::sheet_fill(p, [](const SheetFrame& f, const std::vector<ModeTerm>&, double r, double th) {
    return sheet_point(f, none, r, th);
  });
  return out;
}

inline Chain harmonic_competitor(const PerturbedSection& p) { return competitor_trio(p).h; }

struct BoundaryCheck {
  bool exact = false;
  long long line_multiplicity = 0;  // coefficient of the segment from -l to +l
  std::string detail;
};

/// Checks dH = Z + q [[-l, l]] at the level of edge multiplicities: every
/// boundary edge off the line must match an arc of Z with the same
/// coefficient, and what remains must be the diameter of B_1 along l carried
/// with coefficient q.
inline BoundaryCheck check_competitor_boundary(const Chain& h, const SphericalChain& z, const Point& line, long long q) {
  BoundaryCheck out;
  SpherePointIndex index(1e-10);
  std::map<std::pair<int, int>, long long> acc;
  auto put = [&](const Point& a, const Point& b, long long c) {
    const int i = index.id(a), j = index.id(b);
    if (i < j)
      acc[{i, j}] += c;
    else
      acc[{j, i}] -= c;
  };
  const auto& cx = h.complex();
  for (const auto& [id, c] : boundary(h).coeffs()) {
    const auto v = cx.simplex(1, id);
    put(cx.vertex(v[0]), cx.vertex(v[1]), c);
  }
  for (const auto& a : z.arcs) put(a.arc.from, a.arc.to, -a.coefficient());
  std::erase_if(acc, [](const auto& kv) { return kv.second == 0; });

  auto on_line = [&](const Point& x) { return (x - x.dot(line) * line).norm() <= 1e-12; };
  double length = 0.0;
  for (const auto& [key, c] : acc) {
    const Point& a = index.point(key.first);
    const Point& b = index.point(key.second);
    if (!on_line(a) || !on_line(b)) {
      out.detail = "unmatched boundary edge off the line";
      return out;
    }
    const long long along = (b - a).dot(line) > 0 ? c : -c;
    if (out.line_multiplicity == 0) out.line_multiplicity = along;
    if (along != out.line_multiplicity) {
      out.detail = "line multiplicity varies along the diameter";
      return out;
    }
    length += (b - a).norm();
  }
  if (out.line_multiplicity != q) {
    out.detail = "line multiplicity " + std::to_string(out.line_multiplicity) + " != " + std::to_string(q);
    return out;
  }
  if (q != 0 && std::abs(length - 2.0) > 1e-9) {
    out.detail = "line part does not cover the diameter";
    return out;
  }
  out.exact = true;
  return out;
}

// ---------------------------------------------------------------------------
// Isoperimetric fill for light closed cycles.

struct CycleFill {
  Chain chain;
  double mass = 0.0;
  double cycle_mass = 0.0;
};

/// Cone over the cycle from the projection of its arc-length centroid to the
/// sphere. Throws if the mass exceeds C (cycle mass)^2.
inline CycleFill isoperimetric_fill(const SphericalChain& cycle, double c = 1.0) {
  if (cycle.empty()) throw EpiError("empty cycle");
  if (!spherical_boundary(cycle).empty()) throw EpiError("fill needs a closed cycle");
  Point centroid = Point::Zero(cycle.ambient_dim());
  for (const auto& a : cycle.arcs) centroid += static_cast<double>(std::llabs(a.coefficient())) * a.arc.angle * arc_point(a.arc, 0.5);
  if (centroid.norm() < 1e-12) throw EpiError("cycle centroid at the origin");
  centroid.normalize();
  ChainBuilder b(cycle.ambient_dim(), 2);
  const int o = b.add_vertex(centroid);
  for (const auto& a : cycle.arcs) b.add({o, b.add_vertex(a.arc.from), b.add_vertex(a.arc.to)}, a.coefficient());
  CycleFill f{b.build(), 0.0, cycle.mass()};
  f.mass = mass(f.chain);
  if (f.mass > c * f.cycle_mass * f.cycle_mass)
    throw EpiError("cycle fill mass " + std::to_string(f.mass) + " exceeds the quadratic bound");
  return f;
}

// ---------------------------------------------------------------------------
// Measured gap.

struct EpiReport {
  double cone_mass = 0.0;             // ||S||(B_1), triangulated
  double cone_mass_exact = 0.0;       // pi Theta
  double cone_competitor_mass = 0.0;  // ||0 x Z||(B_1), triangulated on the shared mesh
  double cone_competitor_exact = 0.0; // length(Z) / 2
  double competitor_mass = 0.0;       // ||H||(B_1)
  double cone_excess = 0.0;
  double competitor_excess = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // ok, trivial, degenerate, boundary
  std::array<double, 4> eps{};
  BoundaryCheck boundary;
};

inline EpiReport epiperimetric_gap(const PerturbedSection& p, const CompetitorTrio& t) {
  EpiReport r;
  r.eps = p.eps;
  r.cone_mass = mass(t.s);
  r.cone_mass_exact = cone_exact_mass(p.spec);
  r.cone_competitor_mass = mass(t.cone);
  r.cone_competitor_exact = cone_over(p.z).exact_mass;
  r.competitor_mass = mass(t.h);
  r.cone_excess = r.cone_competitor_mass - r.cone_mass;
  r.competitor_excess = r.competitor_mass - r.cone_mass;
  r.boundary = check_competitor_boundary(t.h, p.z, p.spec.line, p.spec.boundary_multiplicity());
  if (!r.boundary.exact) {
    r.status = "boundary";
  } else if (std::abs(r.cone_excess) < p.options.trivial_tol && std::abs(r.competitor_excess) < p.options.trivial_tol) {
    r.status = "trivial";
  } else if (r.cone_excess <= 1e-10) {
    r.status = "degenerate";
  } else {
    r.delta = 1.0 - r.competitor_excess / r.cone_excess;
    r.status = "ok";
  }
  return r;
}

inline EpiReport epiperimetric_gap(const PerturbedSection& p) { return epiperimetric_gap(p, competitor_trio(p)); }

/// Single half-plane sheet perturbed by a * sin(k theta) along the first normal.
inline EpiReport single_mode_gap(int k, double a, const EpiOptions& opt = {}) {
  const ConeSpec s = single_half_plane(2);
  return epiperimetric_gap(make_perturbation(s, {{{0, k, a, false}}}, opt));
}

// ---------------------------------------------------------------------------
// Uniformity sweep.

struct SweepRow {
  int cone_id = 0;
  int pert_id = 0;
  std::array<double, 4> eps{};
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // ok, trivial, degenerate, boundary, inadmissible, decomposition, remainder, error
  bool boundary_exact = false;
  double fill_mass = 0.0;
};

struct SweepOptions {
  std::vector<int> modes{2, 3};
  double amp = 0.005;
  std::uint64_t seed = 1;
  double eps0 = 0.2;
  EpiOptions epi;
  unsigned workers = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<ConeSpec> cones;
  double min_delta = std::numeric_limits<double>::quiet_NaN();
  int counted = 0;
  bool all_boundaries_exact = true;  // over rows that reached the competitor
};

namespace detail {

inline std::uint64_t row_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

inline SweepRow sweep_row(const ConeSpec& spec, int cone_id, int pert_id, const SweepOptions& opt) {
  SweepRow row;
  row.cone_id = cone_id;
  row.pert_id = pert_id;
  try {
    const ModeTable table =
        random_modes(spec, opt.modes, opt.amp, detail::row_seed(opt.seed, cone_id + 1, pert_id + 1));
    const PerturbedSection p = measure_perturbation(spec, table, opt.epi);
    row.eps = p.eps;
    if (!p.admissible) {
      row.status = "inadmissible";
      return row;
    }
    const DecompositionResult dec = lemma_decomposition(p.z, cross_section(spec, 0.05), opt.eps0);
    if (!dec.success) {
      row.status = "decomposition";
      return row;
    }
    // Sheet perturbations never produce light cycles; anything routed to
    // Z_{Q+1} is filled and the row is reported separately.
    if (static_cast<int>(dec.z.size()) > dec.q && !dec.z[dec.q].empty()) {
      for (const auto& piece : indecomposable_pieces(dec.z[dec.q]).cycles)
        row.fill_mass += isoperimetric_fill(piece.chain, opt.epi.fill_constant).mass;
      row.status = "remainder";
      return row;
    }
    const EpiReport rep = epiperimetric_gap(p);
    row.boundary_exact = rep.boundary.exact;
    row.delta = rep.delta;
    row.status = rep.status;
  } catch (const std::exception&) {
    row.status = "error";
  }
  return row;
}

/// Samples `cones` cones of C(Q, Qbar, n) and `perts` perturbations of each,
/// and records the measured gap per row. Rows are independent.
inline SweepReport epi_uniformity_sweep(int q, int qbar, int n, int cones, int perts, const SweepOptions& opt = {}) {
  if (cones < 1 || perts < 1) throw EpiError("sweep needs at least one cone and one perturbation");
  SweepReport rep;
  for (int c = 0; c < cones; ++c)
    rep.cones.push_back(sample_cone_space(q, qbar, n, detail::row_seed(opt.seed, c + 1, 0)));
  const std::size_t total = static_cast<std::size_t>(cones) * static_cast<std::size_t>(perts);
  rep.rows = parallel_map(
      total,
      [&](std::size_t i) {
        const int c = static_cast<int>(i) / perts, k = static_cast<int>(i) % perts;
        return sweep_row(rep.cones[c], c, k, opt);
      },
      opt.workers);
  for (const auto& row : rep.rows) {
    if (row.status == "ok" || row.status == "trivial" || row.status == "degenerate" || row.status == "boundary")
      rep.all_boundaries_exact = rep.all_boundaries_exact && row.boundary_exact;
    if (row.status != "ok") continue;
    ++rep.counted;
    if (!(rep.min_delta <= row.delta)) rep.min_delta = row.delta;
  }
  return rep;
}

}  // namespace conelab
