#pragma once

// Reproducible experiment pipelines shared by the command line tool and the
// acceptance run. Each returns a table whose CSV is a function of the
// parameters and the seed only; timings and other run-dependent numbers go
// into `notes`.

#include "conelab/decay.hpp"
#include "conelab/epi.hpp"
#include "conelab/flatnorm.hpp"
#include "conelab/report.hpp"
#include "conelab/straighten.hpp"

#include <chrono>
#include <random>

namespace conelab {

struct Experiment {
  explicit Experiment(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  Table table;
  bool pass = true;
  std::vector<std::string> notes;
  std::vector<std::string> failures;
  std::string svg;

  void fail(const std::string& why) {
    pass = false;
    failures.push_back(why);
  }
};

// ---------------------------------------------------------------------------
// Flat norm against exhaustive search.

struct FlatInstance {
  Chain t, s;
};

/// Two-ring planar patch (12 triangles) with jittered, lifted vertices and
/// random integer 1-chains.
inline FlatInstance random_flat_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> pick(-2, 2);
  const ParamMesh m = polar_mesh({0.5, 1.0}, {uniform_angles(3, false), uniform_angles(6, false)}, false);
  ChainBuilder b(3, 2);
  std::vector<int> ids;
  for (const auto& p : m.points) {
    Point q(3);
    q << p.x() + 0.1 * u(rng), p.y() + 0.1 * u(rng), u(rng);
    ids.push_back(b.add_vertex(q));
  }
  for (const auto& tri : m.triangles) b.add_support({ids[tri[0]], ids[tri[1]], ids[tri[2]]});
  const Chain support = b.build();
  Chain t(support.complex_ptr(), 1), s(support.complex_ptr(), 1);
  for (int id = 0; id < static_cast<int>(support.complex().num_simplices(1)); ++id) {
    if (rng() % 3 == 0) t.add(id, pick(rng));
    if (rng() % 4 == 0) s.add(id, pick(rng));
  }
  return {t, s};
}

inline Experiment flatnorm_experiment(int count = 50, std::uint64_t seed = 1, int coeff_bound = 3) {
  Experiment e{"flatnorm"};
  e.table.header = {"instance", "faces", "flat_lp", "flat_brute", "abs_diff", "integral", "pass"};
  std::mt19937_64 rng(seed);
  double worst_seconds = 0.0;
  for (int i = 0; i < count; ++i) {
    const FlatInstance in = random_flat_instance(rng);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cert = flat_distance(in.t, in.s, 1e6);
    worst_seconds = std::max(worst_seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const double brute = flat_distance_bruteforce(in.t, in.s, coeff_bound);
    const double diff = std::abs(cert.value - brute);
    const bool ok = cert.integral && diff <= 1e-9 * std::max(1.0, brute);
    if (!ok) e.fail("instance " + std::to_string(i) + " differs by " + fmt(diff));
    e.table.add(i, static_cast<long long>(in.t.complex().num_simplices(2)), cert.value, brute, diff, cert.integral, ok);
  }
  e.notes.push_back("slowest LP solve: " + fmt(worst_seconds, 3) + " s");
  if (worst_seconds >= 1.0) e.fail("an LP solve took at least 1 s");
  return e;
}

// ---------------------------------------------------------------------------
// Cone density and classification.

/// Shapes covering open books, closed books and interior-only cones in R^4.
inline std::vector<ConeShape> reference_shapes() {
  return {
      {{}, {1}, 0, 0},       {{}, {2}, 0, 0},    {{}, {1, 1}, 0, 0}, {{}, {2, 1}, 0, 0},
      {{}, {1, 1, 1}, 0, 0}, {{}, {}, 2, 1},     {{}, {}, 3, 1},     {{}, {}, 3, 2},
      {{1}, {}, 0, 0},       {{2}, {}, 0, 0},    {{1, 1}, {}, 0, 0},
  };
}

inline std::vector<ConeSpec> reference_cones(int count, std::uint64_t seed) {
  // Round-robin over the three families so every prefix mixes them.
  const auto shapes = reference_shapes();
  const std::vector<std::vector<int>> family{{0, 1, 2, 3, 4}, {5, 6, 7}, {8, 9, 10}};
  std::mt19937_64 rng(seed);
  std::vector<ConeSpec> out;
  for (int i = 0; i < count; ++i) {
    const auto& f = family[i % 3];
    out.push_back(sample_cone_of_shape(shapes[f[(i / 3) % f.size()]], 2, rng));
  }
  return out;
}

inline Experiment cone_experiment(int count = 20, double h = 0.02, std::uint64_t seed = 1) {
  Experiment e{"cone"};
  e.table.header = {"cone", "case", "twice_theta", "q", "mass_over_pi", "density_error", "classified_case",
                    "multiplicities_match", "pass"};
  const auto specs = reference_cones(count, seed);
  const auto rows = parallel_map(specs.size(), [&](std::size_t i) {
    const ConeSpec& s = specs[i];
    const Chain c = make_cone(s, h);
    std::string got = "error";
    bool match = false;
    try {
      const ConeClassification cl = classify(c);
      got = to_string(cl.spec.case_tag);
      match = specs_match(cl.spec, s, 1e-6);
    } catch (const std::exception&) {
    }
    return std::tuple{mass(c) / std::numbers::pi, got, match};
  });
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ConeSpec& s = specs[i];
    const auto& [ratio, got, match] = rows[i];
    const HalfInteger th = density_at_origin(s);
    const double err = std::abs(ratio - th.value());
    const int q = s.boundary_multiplicity();
    const bool ok = err <= 1e-3 && th.twice >= q && got == to_string(s.case_tag) && match;
    if (!ok) e.fail("cone " + std::to_string(i));
    e.table.add(static_cast<int>(i), to_string(s.case_tag), th.twice, q, ratio, err, got, match, ok);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Sector identity for cones over spherical chains.

inline SphericalChain random_spherical_chain(std::mt19937_64& rng, int dim = 4, int arcs = 6) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> mult(1, 3), sign(0, 1);
  SphericalChain z;
  while (static_cast<int>(z.arcs.size()) < arcs) {
    Point a(dim), b(dim);
    for (int i = 0; i < dim; ++i) a[i] = g(rng), b[i] = g(rng);
    a.normalize(), b.normalize();
    const double ang = sphere_angle(a, b);
    if (ang < 0.05 || ang > std::numbers::pi - 0.3) continue;
    z.add(make_arc(a, b), mult(rng), sign(rng) ? 1 : -1);
  }
  return z;
}

/// Splits every arc into `factor` times as many equal pieces as needed to keep
/// pieces below `max_angle`.
inline SphericalChain subdivided(const SphericalChain& z, double max_angle, int factor = 1) {
  SphericalChain out;
  for (const auto& a : z.arcs) {
    const int m = factor * std::max(1, static_cast<int>(std::ceil(a.arc.angle / max_angle)));
    for (int i = 0; i < m; ++i)
      out.add(make_arc(i == 0 ? a.arc.from : arc_point(a.arc, static_cast<double>(i) / m),
                       i + 1 == m ? a.arc.to : arc_point(a.arc, static_cast<double>(i + 1) / m)),
              a.multiplicity, a.orientation);
  }
  return out;
}

inline Experiment sector_experiment(int count = 100, std::uint64_t seed = 1) {
  Experiment e{"sector"};
  e.table.header = {"chain", "exact_mass", "half_length", "abs_diff", "err_h", "err_h2", "err_h4", "ratio1", "ratio2",
                    "pass"};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const SphericalChain z = random_spherical_chain(rng);
    const double exact = cone_over(z).exact_mass;
    const double diff = std::abs(exact - z.mass() / 2.0);
    // Flat fans under the arcs lose area at second order in the arc angle.
    double err[3];
    for (int j = 0; j < 3; ++j) err[j] = exact - mass(cone_over(subdivided(z, 0.2, 1 << j)).chain);
    const double r1 = err[0] / err[1], r2 = err[1] / err[2];
    const bool ok = diff <= 1e-12 && std::abs(r1 - 4.0) <= 0.5 && std::abs(r2 - 4.0) <= 0.5;
    if (!ok) e.fail("chain " + std::to_string(i));
    e.table.add(i, exact, z.mass() / 2.0, diff, err[0], err[1], err[2], r1, r2, ok);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Monotonicity and excess.

inline std::vector<double> dyadic_radii(double largest = 0.4, int count = 6) { return geometric_radii(largest, 0.5, count); }

inline SheetMeshOptions fine_sheet_mesh() {
  SheetMeshOptions o;
  o.r_min = 2e-3;
  o.ratio = 1.04;
  o.segments = 160;
  return o;
}

inline ConeSpec reference_closed_book() {
  ConeSpec s;
  s.n = 2;
  s.line = Point::Unit(4, 0);
  s.halfplanes = {{Point::Unit(4, 1), 2}, {Point(-Point::Unit(4, 1)), -1}};
  s.case_tag = ConeCase::ClosedBook;
  return s;
}

/// Inequality rows for exact cones (both sides must vanish) and for the
/// holomorphic half-graph (LHS - RHS >= -tol).
inline Experiment monotonicity_experiment(const std::vector<double>& radii = dyadic_radii(), double tol = 1e-6) {
  Experiment e{"monotonicity"};
  e.table.header = {"surface", "s", "sigma", "lhs", "rhs", "slack", "pass"};
  const AlmostMinParams prm;
  const std::vector<std::pair<std::string, Chain>> inputs{
      {"half_plane_cone", make_cone(single_half_plane(2), 0.05)},
      {"closed_book_cone", make_cone(reference_closed_book(), 0.05)},
      {"holomorphic_half_graph", surface_chain(surfaces::holomorphic_half_graph(), fine_sheet_mesh())},
  };
  MonotonicityOptions mo;
  mo.tolerance = tol;
  Series lhs{"lhs half-graph", {}, {}}, rhs{"rhs half-graph", {}, {}};
  for (const auto& [name, chain] : inputs) {
    const bool cone = name != "holomorphic_half_graph";
    const auto rep = monotonicity_check(chain, prm, 1.0, radii, mo);
    for (const auto& row : rep.rows) {
      const bool ok = cone ? std::abs(row.lhs) <= 1e-9 && std::abs(row.rhs) <= 1e-9 : row.slack >= -tol;
      if (!ok) e.fail(name + " at s=" + fmt(row.s));
      e.table.add(name, row.s, row.sigma, row.lhs, row.rhs, row.slack, ok);
      if (!cone) {
        lhs.x.push_back(row.sigma), lhs.y.push_back(row.lhs);
        rhs.x.push_back(row.sigma), rhs.y.push_back(row.rhs);
      }
    }
  }
  e.svg = svg_plot({lhs, rhs}, {"Monotonicity on the half-graph", "sigma", "value", true, true, {}});
  return e;
}

/// e(0,r) of the half-graph against two closed forms: the paraboloid formula
/// [(1+4r^2)^(3/2) - 1]/(12 r^2) - 1/2 (pass column, 5%) and the exact ratio
/// of the holomorphic graph (s^2/2 + s^4)/r^2 - 1/2, s^2 = (sqrt(1+4r^2)-1)/2.
inline Experiment excess_oracle_experiment(const std::vector<double>& radii = {0.05, 0.1, 0.2, 0.4}, double rel_tol = 0.05) {
  Experiment e{"excess_oracle"};
  e.table.header = {"r", "excess", "paraboloid_oracle", "rel_err_paraboloid", "graph_oracle", "rel_err_graph", "pass"};
  const Chain t = surface_chain(surfaces::holomorphic_half_graph(), fine_sheet_mesh());
  for (double r : radii) {
    const double ex = spherical_excess(t, {}, r, 0.5);
    const double para = (std::pow(1.0 + 4.0 * r * r, 1.5) - 1.0) / (12.0 * r * r) - 0.5;
    const double s2 = 0.5 * (std::sqrt(1.0 + 4.0 * r * r) - 1.0);
    const double graph = (0.5 * s2 + s2 * s2) / (r * r) - 0.5;
    const double ep = std::abs(ex / para - 1.0), eg = std::abs(ex / graph - 1.0);
    const bool ok = ep <= rel_tol;
    if (!ok) e.fail("paraboloid oracle off by " + fmt(100.0 * ep, 3) + "% at r=" + fmt(r));
    e.table.add(r, ex, para, ep, graph, eg, ok);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Decay of the holomorphic half-graph towards its tangent half-plane.

inline std::vector<double> candidate_angles() { return {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3}; }

inline Experiment decay_table(const DecayReport& rep, const std::string& name) {
  Experiment e{name};
  e.table.header = {"radius", "excess", "flat", "hausdorff", "best_candidate"};
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    e.table.add(rep.radii[i], rep.excess[i], rep.flat[i], rep.hausdorff[i], rep.best[i]);
  e.notes = {"excess slope " + fmt(rep.excess_fit.slope, 4), "flat slope " + fmt(rep.flat_fit.slope, 4),
             "hausdorff slope " + fmt(rep.hausdorff_fit.slope, 4),
             "limit candidate " + std::to_string(rep.limit_cone) + (rep.unique ? " (unique)" : " (not unique)")};
  const Series ex{"excess", rep.radii, rep.excess}, fl{"flat", rep.radii, rep.flat}, ha{"hausdorff", rep.radii, rep.hausdorff};
  e.svg = svg_plot({ex, fl, ha}, {"Decay at the boundary point", "rho", "value", true, true, e.notes});
  return e;
}

inline DecayOptions default_decay_options() {
  DecayOptions o;
  o.excess_mesh.r_min = 2e-3;
  o.excess_mesh.segments = 128;
  return o;
}

inline Experiment decay_half_graph_experiment(const std::vector<double>& radii = dyadic_radii()) {
  const auto cands = rotated_half_planes(Point::Unit(4, 0), Point::Unit(4, 1), Point::Unit(4, 2), candidate_angles());
  const DecayReport rep =
      decay_experiment(surfaces::holomorphic_half_graph(), {}, 0.5, cands, radii, default_decay_options());
  Experiment e = decay_table(rep, "decay");
  if (std::abs(rep.excess_fit.slope - 2.0) > 0.1) e.fail("excess slope " + fmt(rep.excess_fit.slope, 4));
  if (std::abs(rep.flat_fit.slope - 1.0) > 0.1) e.fail("flat slope " + fmt(rep.flat_fit.slope, 4));
  if (!rep.unique) e.fail("argmin candidate changes across the smallest radii");
  if (rep.limit_cone != 3) e.fail("limit candidate is not the tangent half-plane");
  return e;
}

// ---------------------------------------------------------------------------
// Decomposition of perturbed cross-sections.

struct DecomposeRunOptions {
  int q = 2, qbar = 6, n = 2;
  int count = 100;
  double amp = 0.02;
  double epsilon = 0.05;
  double eps0 = 0.2;
  int samples = 32;
  std::vector<int> modes{2, 3};
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

/// Random modes at the requested amplitude, halved until the realized
/// epsilon-values are admissible (at most eight halvings).
inline PerturbedSection admissible_perturbation(const ConeSpec& spec, const DecomposeRunOptions& o, std::uint64_t seed,
                                                double& scale) {
  EpiOptions eo;
  eo.epsilon = o.epsilon;
  eo.samples = o.samples;
  ModeTable table = random_modes(spec, o.modes, o.amp, seed);
  scale = 1.0;
  for (int i = 0; i <= 8; ++i) {
    PerturbedSection p = measure_perturbation(spec, table, eo);
    if (p.admissible) return p;
    scale *= 0.5;
    for (auto& sheet : table)
      for (auto& t : sheet) t.a *= 0.5;
  }
  throw EpiError("no admissible amplitude found");
}

inline Experiment decompose_experiment(const DecomposeRunOptions& o = {}) {
  Experiment e{"decompose"};
  e.table.header = {"row", "case", "twice_theta", "amp_scale", "eps_flat", "eps_mass", "eps_hausdorff", "success",
                    "conditions_pass", "mass_defect", "pass"};
  struct Row {
    ConeSpec spec;
    double scale = 0.0;
    std::array<double, 4> eps{};
    bool success = false, conditions = false;
    double defect = 0.0;
    std::string error;
  };
  const auto rows = parallel_map(
      static_cast<std::size_t>(o.count),
      [&](std::size_t i) {
        Row r;
        r.spec = sample_cone_space(o.q, o.qbar, o.n, detail::row_seed(o.seed, i + 1, 0));
        try {
          const PerturbedSection p = admissible_perturbation(r.spec, o, detail::row_seed(o.seed, i + 1, 1), r.scale);
          r.eps = p.eps;
          const DecompositionResult dec = lemma_decomposition(p.z, p.r, o.eps0);
          r.success = dec.success;
          r.conditions = dec.all_pass();
          double sum = 0.0;
          for (const auto& zi : dec.z) sum += zi.mass();
          r.defect = std::abs(p.z.mass() - sum);
        } catch (const std::exception& ex) {
          r.error = ex.what();
        }
        return r;
      },
      o.workers);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const bool ok = r.error.empty() && r.success && r.conditions && r.defect <= 1e-12;
    if (!ok) e.fail("row " + std::to_string(i) + (r.error.empty() ? "" : ": " + r.error));
    e.table.add(static_cast<int>(i), to_string(r.spec.case_tag), density_at_origin(r.spec).twice, r.scale, r.eps[1],
                r.eps[2], r.eps[3], r.success, r.conditions, r.defect, ok);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Boundary straightening.

inline StraighteningReport straighten_report(const CurveGraph& c, const VerifyOptions& vo = {}) {
  return verify_straightening(build_straightening(c), vo);
}

/// psi(t) = amp t^2 and its double: properties (i)/(ii) at fixed tolerances,
/// linear scaling of the (iii)/(iv) constants, and the mass sandwich
/// |ratio - 1| <= C amp rho^alpha with C the verification constant.
inline Experiment straighten_experiment(double amp = 0.01, double scale_tol = 0.15) {
  Experiment e{"straighten"};
  e.table.header = {"amp", "sphere_error", "line_error", "inverse_error", "dphi_seminorm", "c_iii", "iv_raw", "c_iv",
                    "sandwich_0.25", "sandwich_0.5", "sandwich_1", "pass"};
  const VerifyOptions vo;
  StraighteningReport reps[2];
  for (int j = 0; j < 2; ++j) {
    const double a = amp * (1 << j);
    reps[j] = straighten_report(parabola_curve(a), vo);
    const auto& r = reps[j];
    bool ok = r.sphere_error <= 1e-12 && r.line_error <= 1e-8 && r.sandwich.size() == 3;
    for (const auto& row : r.sandwich) ok = ok && std::abs(row.ratio - 1.0) <= vo.c1 * a * row.rho;
    if (!ok) e.fail("amplitude " + fmt(a));
    e.table.add(a, r.sphere_error, r.line_error, r.inverse_error, r.dphi_seminorm, r.c_iii, r.iv_raw, r.c_iv,
                r.sandwich.at(0).ratio, r.sandwich.at(1).ratio, r.sandwich.at(2).ratio, ok);
  }
  const double s3 = reps[1].dphi_seminorm / reps[0].dphi_seminorm, s4 = reps[1].iv_raw / reps[0].iv_raw;
  e.notes = {"(iii) doubling ratio " + fmt(s3, 4), "(iv) doubling ratio " + fmt(s4, 4)};
  if (std::abs(s3 / 2.0 - 1.0) > scale_tol) e.fail("(iii) constant does not scale linearly: " + fmt(s3, 4));
  if (std::abs(s4 / 2.0 - 1.0) > scale_tol) e.fail("(iv) constant does not scale linearly: " + fmt(s4, 4));
  return e;
}

inline Experiment straighten_curve_experiment(const CurveGraph& c) {
  Experiment e{"straighten"};
  e.table.header = {"sphere_error", "line_error", "inverse_error", "dphi_seminorm", "c_iii", "c_iv", "pass"};
  const auto r = straighten_report(c);
  if (!r.pass()) e.fail("verification failed");
  e.table.add(r.sphere_error, r.line_error, r.inverse_error, r.dphi_seminorm, r.c_iii, r.c_iv, r.pass());
  return e;
}

// ---------------------------------------------------------------------------
// Epiperimetric gap.

/// Single half-plane sheet, a sin(k theta): the measured delta against the
/// target 1 - 2k/(1+k^2) (pass column, tolerance 0.05) and against the
/// second-order value (k-1)/(k+1) for a spherical cross-section.
inline Experiment epi_mode_experiment(const std::vector<int>& ks = {2, 3, 4}, double a = 0.01, double tol = 0.05) {
  Experiment e{"epi_modes"};
  e.table.header = {"k", "amp", "cone_excess", "competitor_excess", "delta", "target", "spherical_value",
                    "boundary_exact", "pass"};
  for (int k : ks) {
    const EpiReport r = single_mode_gap(k, a);
    const double target = 1.0 - 2.0 * k / (1.0 + k * k);
    const bool ok = r.status == "ok" && std::abs(r.delta - target) <= tol && r.boundary.exact;
    if (!ok) e.fail("k=" + std::to_string(k) + ": delta " + fmt(r.delta, 4) + " vs " + fmt(target, 4));
    e.table.add(k, a, r.cone_excess, r.competitor_excess, r.delta, target, (k - 1.0) / (k + 1.0), r.boundary.exact, ok);
  }
  return e;
}

inline Experiment epi_sweep_experiment(int q, int qbar, int n, int cones, int perts, const SweepOptions& o,
                                       double min_delta = 0.15) {
  Experiment e{"epi"};
  e.table.header = {"cone_id", "pert_id", "eps_i", "eps_ii", "eps_iii", "eps_iv", "delta", "status", "boundary_exact"};
  const SweepReport rep = epi_uniformity_sweep(q, qbar, n, cones, perts, o);
  std::vector<double> deltas;
  for (const auto& r : rep.rows) {
    e.table.add(r.cone_id, r.pert_id, r.eps[0], r.eps[1], r.eps[2], r.eps[3], r.delta, r.status, r.boundary_exact);
    if (r.status == "ok") deltas.push_back(r.delta);
  }
  e.notes = {"rows with a measured gap: " + std::to_string(rep.counted) + " of " + std::to_string(rep.rows.size()),
             "min delta " + fmt(rep.min_delta, 4)};
  if (!rep.all_boundaries_exact) e.fail("an assembled competitor has the wrong boundary");
  if (rep.counted == 0) e.fail("no row produced a gap");
  else if (!(rep.min_delta >= min_delta)) e.fail("min delta " + fmt(rep.min_delta, 4) + " below " + fmt(min_delta));
  for (const auto& r : rep.rows)
    if (r.status != "ok" && r.status != "trivial")
      e.fail("row " + std::to_string(r.cone_id) + "/" + std::to_string(r.pert_id) + ": " + r.status);
  e.svg = svg_histogram(deltas, 20, {"Measured epiperimetric gap", "delta", "rows", false, false, e.notes});
  return e;
}

// ---------------------------------------------------------------------------
// Nets in cone space.

inline Experiment net_experiment(int q, int qbar, int n, double eps, int trials, std::uint64_t seed, const NetOptions& o = {}) {
  Experiment e{"net"};
  e.table.header = {"trial", "distance_to_net", "covered"};
  const NetReport rep = cone_space_net(q, qbar, n, eps, trials, seed, o);
  for (std::size_t i = 0; i < rep.trial_distances.size(); ++i)
    e.table.add(static_cast<int>(i), rep.trial_distances[i], rep.trial_distances[i] <= eps);
  e.notes = {"net size " + std::to_string(rep.net.size()),
             "covered " + std::to_string(rep.covered) + " of " + std::to_string(rep.trials),
             "worst distance " + fmt(rep.worst_distance, 4)};
  if (rep.covered < rep.trials) e.fail("net does not cover every trial");
  return e;
}

}  // namespace conelab
