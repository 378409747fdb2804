// Batch driver: verify, flow, find-nodal, sweep.
// Exit codes: 0 success, 2 configuration error, 3 search or numerical
// failure, 4 verification failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sps/basis.hpp"
#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/flow.hpp"
#include "sps/io.hpp"
#include "sps/search.hpp"
#include "sps/sweep.hpp"
#include "sps/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSearch = 3;
constexpr int kExitVerify = 4;

struct RunConfig {
  int k = 2;
  double q = 3.5;
  double radius = 5.0;
  std::vector<double> radii = {5.0, 10.0, 20.0};
  double density = 200.0;
  double dt = 2e-3;
  double t_max = 200.0;
  double stagnation_rel = 1e-8;
  std::vector<double> direction;  // empty: alternating signs
  double amplitude = 1.0;
  std::string init;               // flow: start from a profile.csv instead of the basis
  double perturb = 0.0;           // flow: add perturb * w_1 to the initial datum
  unsigned long long seed = 0;
  int jobs = 1;
  bool warm_start = false;
  bool relax_q3 = false;
  int kernel_nodes = 2048;
  std::string out = "sps_out";
};

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

// Flat JSON keys mirror RunConfig; unknown keys are rejected.
void load_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw sps::ConfigError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw sps::ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw sps::ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known = {
      "k", "q", "radius", "radii", "density", "dt", "t_max", "stagnation_rel", "direction", "amplitude", "init",
      "perturb", "seed", "jobs", "warm_start", "relax_q3", "kernel_nodes", "out"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw sps::ConfigError("unknown config key " + key);
  }
  try {
    take(j, "k", c.k);
    take(j, "q", c.q);
    take(j, "radius", c.radius);
    take(j, "radii", c.radii);
    take(j, "density", c.density);
    take(j, "dt", c.dt);
    take(j, "t_max", c.t_max);
    take(j, "stagnation_rel", c.stagnation_rel);
    take(j, "direction", c.direction);
    take(j, "amplitude", c.amplitude);
    take(j, "init", c.init);
    take(j, "perturb", c.perturb);
    take(j, "seed", c.seed);
    take(j, "jobs", c.jobs);
    take(j, "warm_start", c.warm_start);
    take(j, "relax_q3", c.relax_q3);
    take(j, "kernel_nodes", c.kernel_nodes);
    take(j, "out", c.out);
  } catch (const json::exception& e) {
    throw sps::ConfigError(std::string("config file has a value of the wrong type: ") + e.what());
  }
}

// The config file is applied before flag parsing so that flags override it.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

int nodes_for(double radius, double density) {
  const double cells = radius * density;
  const long rounded = std::lround(cells);
  if (!(density > 0.0) || std::abs(cells - static_cast<double>(rounded)) > 1e-9 * cells) {
    throw sps::ConfigError("radius * density must be a positive integer");
  }
  return static_cast<int>(rounded) + 1;
}

void validate_common(const RunConfig& c) {
  if (c.k < 2) throw sps::ConfigError("k must be at least 2");
  sps::validate_exponent(c.q);
  if (c.jobs < 1) throw sps::ConfigError("jobs must be at least 1");
  if (!(c.dt > 0.0)) throw sps::ConfigError("dt must be positive");
  if (!(c.t_max > 0.0)) throw sps::ConfigError("t-max must be positive");
}

void validate_radius(double r) {
  if (!(r >= 1.0)) throw sps::ConfigError("radius must be at least 1");
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (ec || !f) throw sps::ConfigError("output directory " + dir.string() + " is not writable");
  f.close();
  fs::remove(probe, ec);
}

std::vector<double> direction_or_default(const RunConfig& c) {
  if (c.direction.empty()) return sps::alternating_direction(c.k);
  if (static_cast<int>(c.direction.size()) != c.k) throw sps::ConfigError("direction must have k entries");
  return c.direction;
}

sps::FlowConfig flow_config(const RunConfig& c) {
  sps::FlowConfig f;
  f.dt = c.dt;
  f.t_max = c.t_max;
  f.stagnation_rel = c.stagnation_rel;
  f.validate();
  return f;
}

sps::BasisOptions basis_options(const RunConfig& c) {
  sps::BasisOptions b;
  b.enforce_q3_constraint = !c.relax_q3;
  return b;
}

sps::RadialField read_profile(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw sps::ConfigError("cannot read initial profile " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "r,u,phi") throw sps::ConfigError("initial profile must have the header r,u,phi");
  std::vector<double> r;
  std::vector<double> u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    try {
      r.push_back(std::stod(a));
      u.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw sps::ConfigError("malformed row in initial profile: " + line);
    }
  }
  if (r.size() < 2) throw sps::ConfigError("initial profile has too few rows");
  const sps::GridPtr grid = sps::build_uniform(r.back(), static_cast<int>(r.size()));
  return sps::RadialField(grid, std::move(u));
}

void print_candidate(const sps::SearchResult& res, const sps::WkBasis& basis) {
  const sps::EquilibriumCandidate& c = res.candidate;
  std::printf("accepted: route=%s E=%.10g nodal_count=%d residual_inf=%.3e newton_iterations=%d\n",
              sps::to_string(res.route).c_str(), c.energy.total, c.nodal.count, c.residual_inf, c.newton_iterations);
  std::printf("basis: M_k=%.10g C_k=%.10g E<=C_k=%s\n", basis.m_max,
              sps::energy_upper_bound(basis.k, basis.m_max, basis.q),
              c.energy.total <= sps::energy_upper_bound(basis.k, basis.m_max, basis.q) ? "true" : "false");
}

int cmd_verify(const RunConfig& c) {
  ensure_writable(c.out);
  sps::VerifyOptions opts;
  opts.seed = c.seed == 0 ? opts.seed : c.seed;
  opts.kernel_nodes = c.kernel_nodes;
  const auto results = sps::run_verification(opts);
  json props = json::array();
  const sps::PropertyResult* first_failure = nullptr;
  for (const auto& p : results) {
    props.push_back({{"name", p.name}, {"passed", p.passed}, {"value", p.value}, {"tolerance", p.tolerance}});
    std::printf("%-18s %s  %s\n", p.name.c_str(), p.passed ? "PASS" : "FAIL", p.detail.c_str());
    if (!p.passed && !first_failure) first_failure = &p;
  }
  json report = {{"passed", first_failure == nullptr},
                 {"first_failure", first_failure ? json(first_failure->name) : json(nullptr)},
                 {"properties", props}};
  std::ofstream(fs::path(c.out) / "verify_report.json") << report.dump(2) << "\n";
  if (first_failure) {
    std::fprintf(stderr, "verification failed: %s\n", first_failure->name.c_str());
    return kExitVerify;
  }
  return 0;
}

int cmd_flow(const RunConfig& c) {
  validate_common(c);
  ensure_writable(c.out);
  std::optional<sps::RadialField> u0;
  sps::GridPtr grid;
  if (!c.init.empty()) {
    u0 = read_profile(c.init);
    grid = u0->grid_ptr();
  } else {
    validate_radius(c.radius);
    grid = sps::build_uniform(c.radius, nodes_for(c.radius, c.density));
  }
  const sps::WkBasis basis = sps::build_basis(c.k, c.q, grid, basis_options(c));
  std::vector<double> direction = direction_or_default(c);
  if (!u0) {
    std::vector<double> t = direction;
    for (double& x : t) x *= c.amplitude;
    u0 = sps::combine(basis, t);
  }
  if (c.perturb != 0.0) u0 = *u0 + c.perturb * basis.bumps.front();
  const sps::FlowTrajectory tr = sps::integrate(u0->with_zero_trace(), c.q, flow_config(c));
  sps::write_flow_artifacts(c.out, tr, c.k, c.q, c.init.empty() ? direction : std::vector<double>{});
  int lo = 1 << 30;
  int hi = -1;
  for (const auto& s : tr.steps) {
    lo = std::min(lo, s.nodal_count);
    hi = std::max(hi, s.nodal_count);
  }
  std::printf("verdict: %s t_end=%.6g steps=%zu\n", sps::to_string(tr.verdict).c_str(),
              tr.steps.empty() ? 0.0 : tr.steps.back().t, tr.steps.size());
  std::printf("nodal_count range: [%d, %d] monotonicity_violation=%d energy_violation=%d\n", tr.steps.empty() ? 0 : lo,
              hi, tr.nodal_monotonicity_violation(), tr.energy_monotonicity_violation());
  return 0;
}

int cmd_find_nodal(const RunConfig& c) {
  validate_common(c);
  validate_radius(c.radius);
  ensure_writable(c.out);
  const sps::GridPtr grid = sps::build_uniform(c.radius, nodes_for(c.radius, c.density));
  const sps::WkBasis basis = sps::build_basis(c.k, c.q, grid, basis_options(c));
  sps::SearchOptions opts;
  opts.flow = flow_config(c);
  opts.seed = c.seed;
  const auto direction = direction_or_default(c);
  const sps::SearchResult res = sps::find_nodal(basis, direction, opts);
  sps::write_candidate_artifacts(c.out, res, basis);
  print_candidate(res, basis);
  return 0;
}

int cmd_sweep(const RunConfig& c) {
  validate_common(c);
  for (double r : c.radii) validate_radius(r);
  ensure_writable(c.out);
  sps::SweepOptions opts;
  opts.density = c.density;
  opts.jobs = c.jobs;
  opts.warm_start = c.warm_start;
  opts.search.flow = flow_config(c);
  opts.search.seed = c.seed;
  const sps::SweepReport rep = sps::run_sweep(c.k, c.q, c.radii, opts);
  sps::write_sweep_artifacts(c.out, rep);
  for (const auto& e : rep.entries) {
    if (e.result) {
      std::printf("R=%g E=%.10g outer_crossing=%.6g\n", e.radius, e.result->candidate.energy.total,
                  e.result->candidate.nodal.crossings.empty() ? NAN : e.result->candidate.nodal.crossings.back());
    } else {
      std::printf("R=%g failed: %s\n", e.radius, e.error.c_str());
    }
  }
  std::printf("all_accepted=%s energy_bound=%s h1_bound=%s crossings_agree=%s C_k=%.10g\n",
              rep.all_accepted ? "true" : "false", rep.energy_bound ? "true" : "false",
              rep.h1_bound ? "true" : "false", rep.crossings_agree ? "true" : "false", rep.c_k);
  return rep.all_accepted ? 0 : kExitSearch;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string config_path;

  CLI::App app{"Radial Schroedinger-Poisson-Slater nodal solutions on balls"};
  app.require_subcommand(1);
  app.fallthrough();  // --config may follow the subcommand
  app.add_option("--config", config_path, "JSON file with flat RunConfig keys; flags override it");

  auto add_physics = [&](CLI::App* s) {
    s->add_option("--k", cfg.k, "number of nodal domains (k >= 2)");
    s->add_option("--q", cfg.q, "exponent in [3, 5)");
    s->add_option("--density", cfg.density, "grid nodes per unit length");
    s->add_option("--dt", cfg.dt, "initial flow time step");
    s->add_option("--t-max", cfg.t_max, "flow horizon");
    s->add_option("--stagnation-rel", cfg.stagnation_rel, "stagnation threshold relative to ||u0||");
    s->add_option("--direction", cfg.direction, "coefficients on the bump basis")->delimiter(',');
    s->add_option("--seed", cfg.seed, "seed for fallback directions");
    s->add_flag("--relax-q3", cfg.relax_q3, "do not enforce M_k < 1/k when q = 3");
    s->add_option("--out", cfg.out, "output directory");
  };

  CLI::App* verify = app.add_subcommand("verify", "run the oracle suite");
  verify->add_option("--kernel-nodes", cfg.kernel_nodes, "grid size of the kernel oracle");
  verify->add_option("--seed", cfg.seed, "seed for the random fields");
  verify->add_option("--out", cfg.out, "output directory");

  CLI::App* flow = app.add_subcommand("flow", "integrate the parabolic flow from a given datum");
  add_physics(flow);
  flow->add_option("--radius", cfg.radius, "ball radius");
  flow->add_option("--amplitude", cfg.amplitude, "scale of the basis combination");
  flow->add_option("--init", cfg.init, "start from a profile.csv");
  flow->add_option("--perturb", cfg.perturb, "add this multiple of w_1");

  CLI::App* find = app.add_subcommand("find-nodal", "search for a radial solution with k-1 sign changes");
  add_physics(find);
  find->add_option("--radius", cfg.radius, "ball radius");

  CLI::App* sweep = app.add_subcommand("sweep", "solve on a sequence of radii");
  add_physics(sweep);
  sweep->add_option("--radii", cfg.radii, "increasing radii")->delimiter(',');
  sweep->add_option("--jobs", cfg.jobs, "concurrent radii");
  sweep->add_flag("--warm-start", cfg.warm_start, "seed each radius with the previous solution");

  try {
    const std::string path = find_config_arg(argc, argv);
    if (!path.empty()) load_config_file(path, cfg);
    app.parse(argc, argv);
    if (*verify) return cmd_verify(cfg);
    if (*flow) return cmd_flow(cfg);
    if (*find) return cmd_find_nodal(cfg);
    return cmd_sweep(cfg);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const sps::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const sps::SearchError& e) {
    std::fprintf(stderr, "search failed: %s\n", e.what());
    return kExitSearch;
  } catch (const sps::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitSearch;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSearch;
  }
}
