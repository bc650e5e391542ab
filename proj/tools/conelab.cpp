// conelab: command line runner for the experiment pipelines.
//
// Every subcommand writes <out>/<name>.csv (and an SVG where a plot makes
// sense), prints a short summary, and exits 0 when all checks pass, 1 when a
// check fails and 2 on usage or validation errors.

#include "conelab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace conelab;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned workers = 0;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad integer '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

int emit(const Experiment& e, const Common& c, const std::string& stem = {}) {
  std::filesystem::create_directories(c.out);
  const std::string base = (std::filesystem::path(c.out) / (stem.empty() ? e.name : stem)).string();
  save_text(base + ".csv", csv_string(e.table));
  if (!e.svg.empty()) save_text(base + ".svg", e.svg);
  for (const auto& n : e.notes) std::cout << e.name << ": " << n << '\n';
  for (const auto& f : e.failures) std::cout << e.name << ": FAIL " << f << '\n';
  std::cout << e.name << ": " << (e.pass ? "PASS" : "FAIL") << " (" << e.table.rows.size() << " rows -> " << base
            << ".csv)\n";
  return e.pass ? 0 : 1;
}

ConeSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open spec file " + path);
  return read_spec(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyhedral integral-current experiments on area-minimizing cones"};
  app.set_help_flag("--help", "Print this help message and exit");  // --h is the mesh size
  app.set_config("--config", "", "key = value configuration file, one [section] per subcommand");
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Random seed")->envname("CONELAB_SEED");
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--workers", common.workers, "Worker threads (0: hardware concurrency)");

  int code = 0;

  // cone ---------------------------------------------------------------
  auto* cone = app.add_subcommand("cone", "Build cones, check densities and classification");
  std::string cone_action = "sweep", spec_path, chain_out;
  int cone_count = 20;
  double cone_h = 0.02;
  cone->add_option("action", cone_action, "make | sweep")->check(CLI::IsMember({"make", "sweep"}));
  cone->add_option("--spec", spec_path, "Cone spec file (for make)");
  cone->add_option("--h", cone_h, "Mesh size")->check(CLI::Range(1e-4, 1.0));
  cone->add_option("--count", cone_count, "Sampled cones (for sweep)")->check(CLI::PositiveNumber);
  cone->add_option("--chain-out", chain_out, "Write the cone as <file>.mesh and <file>");
  cone->callback([&] {
    if (cone_action == "sweep" && spec_path.empty()) {
      code = emit(cone_experiment(cone_count, cone_h, common.seed), common);
      return;
    }
    if (spec_path.empty()) throw std::invalid_argument("cone make needs --spec");
    const ConeSpec s = load_spec(spec_path);
    const Chain c = make_cone(s, cone_h);
    Experiment e("cone_make");
    e.table.header = {"case", "twice_theta", "mass", "exact_mass", "rel_error", "classified_case", "pass"};
    const ConeClassification cl = classify(c);
    const double m = mass(c), exact = cone_exact_mass(s);
    const bool ok = std::abs(m / exact - 1.0) <= 1e-3 && specs_match(cl.spec, s, 1e-6);
    if (!ok) e.fail("mass or classification mismatch");
    e.table.add(to_string(s.case_tag), density_at_origin(s).twice, m, exact, std::abs(m / exact - 1.0),
                to_string(cl.spec.case_tag), ok);
    if (!chain_out.empty()) {
      save_mesh(chain_out + ".mesh", c.complex());
      std::ofstream f(chain_out);
      write_chain(f, c, std::filesystem::path(chain_out + ".mesh").filename().string());
    }
    code = emit(e, common);
  });

  // flatnorm -----------------------------------------------------------
  auto* flat = app.add_subcommand("flatnorm", "Flat distance LP, against exhaustive search or between chain files");
  int flat_count = 50, flat_bound = 3;
  std::string mesh_path, t_path, s_path;
  double flat_radius = 1e6;
  flat->add_option("--count", flat_count, "Random instances")->check(CLI::PositiveNumber);
  flat->add_option("--bound", flat_bound, "Coefficient bound for exhaustive search")->check(CLI::Range(1, 4));
  flat->add_option("--mesh", mesh_path, "Mesh file shared by --t and --s");
  flat->add_option("--t", t_path, "Chain file T");
  flat->add_option("--s", s_path, "Chain file S");
  flat->add_option("--radius", flat_radius, "Ball radius")->check(CLI::PositiveNumber);
  flat->callback([&] {
    if (mesh_path.empty() && t_path.empty() && s_path.empty()) {
      code = emit(flatnorm_experiment(flat_count, common.seed, flat_bound), common);
      return;
    }
    if (mesh_path.empty() || t_path.empty() || s_path.empty())
      throw std::invalid_argument("--mesh, --t and --s go together");
    const auto cx = std::make_shared<const SimplicialComplex>(load_mesh(mesh_path));
    std::ifstream ft(t_path), fs(s_path);
    if (!ft || !fs) throw std::invalid_argument("cannot open chain file");
    const Chain t = read_chain(ft, cx), s = read_chain(fs, cx);
    const auto cert = flat_distance(t, s, flat_radius);
    Experiment e("flatnorm_pair");
    e.table.header = {"flat_distance", "mass_remainder", "mass_filling", "integral"};
    e.table.add(cert.value, mass(cert.remainder), mass(cert.filling), cert.integral);
    if (!cert.integral) e.fail("relaxed optimum is not integral");
    code = emit(e, common);
  });

  // decompose ----------------------------------------------------------
  auto* dec = app.add_subcommand("decompose", "Decomposition of perturbed cross-sections");
  DecomposeRunOptions dopt;
  std::string dec_modes = "2,3";
  dec->add_option("--Q", dopt.q, "Boundary multiplicity")->check(CLI::NonNegativeNumber);
  dec->add_option("--Qbar", dopt.qbar, "Density bound (twice the density)")->check(CLI::PositiveNumber);
  dec->add_option("--n", dopt.n, "Codimension")->check(CLI::PositiveNumber);
  dec->add_option("--count", dopt.count, "Perturbations")->check(CLI::PositiveNumber);
  dec->add_option("--amp", dopt.amp, "Mode amplitude")->check(CLI::Range(0.0, 0.1));
  dec->add_option("--eps", dopt.epsilon, "Admissibility threshold")->check(CLI::PositiveNumber);
  dec->add_option("--eps0", dopt.eps0, "Decomposition threshold")->check(CLI::PositiveNumber);
  dec->add_option("--samples", dopt.samples, "Samples per half circle")->check(CLI::Range(8, 4096));
  dec->add_option("--modes", dec_modes, "Comma separated mode indices");
  dec->callback([&] {
    dopt.modes = parse_int_list(dec_modes);
    dopt.seed = common.seed;
    dopt.workers = common.workers;
    code = emit(decompose_experiment(dopt), common);
  });

  // monotonicity -------------------------------------------------------
  auto* mono = app.add_subcommand("monotonicity", "Monotonicity inequality and excess oracles");
  double mono_largest = 0.4, mono_tol = 1e-6;
  int mono_count = 6;
  mono->add_option("--largest", mono_largest, "Largest radius")->check(CLI::Range(1e-3, 1.0));
  mono->add_option("--count", mono_count, "Dyadic radii")->check(CLI::Range(2, 12));
  mono->add_option("--tol", mono_tol, "Slack tolerance")->check(CLI::NonNegativeNumber);
  mono->callback([&] {
    const int a = emit(monotonicity_experiment(dyadic_radii(mono_largest, mono_count), mono_tol), common);
    const int b = emit(excess_oracle_experiment(), common);
    code = std::max(a, b);
  });

  // decay --------------------------------------------------------------
  auto* decay = app.add_subcommand("decay", "Excess and flat-distance decay on the holomorphic half-graph");
  double decay_largest = 0.4;
  int decay_count = 6;
  decay->add_option("--largest", decay_largest, "Largest radius")->check(CLI::Range(1e-2, 1.0));
  decay->add_option("--count", decay_count, "Dyadic radii")->check(CLI::Range(6, 10));
  decay->callback([&] { code = emit(decay_half_graph_experiment(dyadic_radii(decay_largest, decay_count)), common); });

  // straighten ---------------------------------------------------------
  auto* str = app.add_subcommand("straighten", "Boundary straightening diffeomorphism checks");
  double str_amp = 0.01;
  std::string curve_path;
  str->add_option("--amp", str_amp, "Parabola amplitude psi(t) = amp t^2")->check(CLI::Range(0.0, 0.02));
  str->add_option("--curve", curve_path, "Curve file (t psi dpsi rows)");
  str->callback([&] {
    code = curve_path.empty() ? emit(straighten_experiment(str_amp), common)
                              : emit(straighten_curve_experiment(load_curve(curve_path)), common);
  });

  // epi ----------------------------------------------------------------
  auto* epi = app.add_subcommand("epi", "Epiperimetric gap: uniformity sweep or single modes");
  int eq = 1, eqbar = 1, en = 2, econes = 1, eperts = 1;
  std::string emodes = "2,3";
  SweepOptions eopt;
  double emin = 0.15;
  bool single = false;
  epi->add_option("--Q", eq, "Boundary multiplicity")->check(CLI::NonNegativeNumber);
  epi->add_option("--Qbar", eqbar, "Density bound (twice the density)")->check(CLI::PositiveNumber);
  epi->add_option("--n", en, "Codimension")->check(CLI::PositiveNumber);
  epi->add_option("--cones", econes, "Sampled cones")->check(CLI::PositiveNumber);
  epi->add_option("--perts", eperts, "Perturbations per cone")->check(CLI::PositiveNumber);
  epi->add_option("--modes", emodes, "Comma separated mode indices");
  epi->add_option("--amp", eopt.amp, "Mode amplitude")->check(CLI::Range(0.0, 0.05));
  epi->add_option("--samples", eopt.epi.samples, "Samples per half circle")->check(CLI::Range(8, 4096));
  epi->add_option("--rings", eopt.epi.rings, "Competitor mesh rings")->check(CLI::Range(2, 1024));
  epi->add_option("--min-delta", emin, "Required lower bound for the sweep");
  epi->add_flag("--single", single, "Single half-plane sheet, one row per mode (amplitude --amp)");
  epi->callback([&] {
    const auto ks = parse_int_list(emodes);
    for (int k : ks)
      if (k < 1) throw std::invalid_argument("mode indices start at 1");
    if (single) {
      code = emit(epi_mode_experiment(ks, eopt.amp), common);
      return;
    }
    eopt.modes = ks;
    eopt.seed = common.seed;
    eopt.workers = common.workers;
    code = emit(epi_sweep_experiment(eq, eqbar, en, econes, eperts, eopt, emin), common);
  });

  // net ----------------------------------------------------------------
  auto* net = app.add_subcommand("net", "Greedy epsilon-net of a cone space");
  int nq = 1, nqbar = 1, nn = 1, ntrials = 50;
  double neps = 0.3;
  NetOptions nopt;
  net->add_option("--Q", nq, "Boundary multiplicity")->check(CLI::NonNegativeNumber);
  net->add_option("--Qbar", nqbar, "Density bound (twice the density)")->check(CLI::PositiveNumber);
  net->add_option("--n", nn, "Codimension")->check(CLI::PositiveNumber);
  net->add_option("--eps", neps, "Net radius")->check(CLI::PositiveNumber);
  net->add_option("--trials", ntrials, "Fresh samples tested against the net")->check(CLI::NonNegativeNumber);
  net->add_option("--pool", nopt.pool, "Candidate pool")->check(CLI::PositiveNumber);
  net->callback([&] {
    nopt.workers = common.workers;
    code = emit(net_experiment(nq, nqbar, nn, neps, ntrials, common.seed, nopt), common);
  });

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    // Module preconditions and unreadable inputs.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return code;
}
