// Acceptance gate: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--out DIR] [--expect-fail 6,8]
// Exit status is 0 iff the set of failing criteria equals the --expect-fail
// set (empty by default), so a criterion that starts passing or failing
// unexpectedly both turn the run red.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/basis.hpp"
#include "sps/energy.hpp"
#include "sps/flow.hpp"
#include "sps/io.hpp"
#include "sps/nodal.hpp"
#include "sps/poisson.hpp"
#include "sps/search.hpp"
#include "sps/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sps;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  std::vector<std::string> info;  // extra lines printed under the verdict
};

fs::path g_out = "acceptance_out";

// Trajectory audit shared by criteria 4, 5 and 6.
int g_c4_trajectories = 0;
int g_c4_violations = 0;
std::vector<std::pair<std::string, json>> g_c6_logs;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

RadialField random_field(const GridPtr& g, std::mt19937_64& rng, double amplitude) {
  std::normal_distribution<double> normal;
  std::vector<double> a(5);
  for (double& x : a) x = amplitude * normal(rng);
  const double R = g->radius();
  return RadialField::sample(g, [&](double r) {
           double s = 0.0;
           for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::cos((j + 0.5) * std::numbers::pi * r / R);
           return s;
         }).with_zero_trace();
}

double max_abs_diff(const RadialField& a, const RadialField& b) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI; stdout and stderr go to files inside `dir`.
int cli(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string cmd = std::string(SPS_CLI_PATH) + " " + args + " --out " + dir.string() + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

// 1. Kernel oracle against the indicator closed form.
Outcome kernel_oracle() {
  auto error_at = [](int n) {
    const GridPtr g = build_uniform(2.0, n);
    std::vector<double> rho(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rho[i] = g->node(i) <= 1.0 ? 1.0 : 0.0;
    const auto phi = apply_kernel(*g, rho);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double exact = indicator_potential(g->node(i), 1.0);
      err = std::max(err, std::abs(phi[i] - exact) / exact);
    }
    return err;
  };
  const double e1 = error_at(1024);
  const double e2 = error_at(2048);
  const double e3 = error_at(4096);
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  Outcome o;
  o.passed = e2 <= 1e-5 && order >= 1.8;
  o.detail = "max rel error " + fmt("%.3e", e2) + " at n=2048 (<= 1e-5), order " + fmt("%.3f", order) + " (>= 1.8)";
  return o;
}

// 2. Gradient and Jacobian against central differences.
Outcome gradient_consistency() {
  const GridPtr g = build_uniform(5.0, 513);
  std::mt19937_64 rng(2024);
  const double q = 3.5;
  const double eps = 1e-5;
  double worst_g = 0.0;
  double worst_j = 0.0;
  for (int p = 0; p < 20; ++p) {
    const RadialField u = random_field(g, rng, 1.0);
    const RadialField v = random_field(g, rng, 1.0);
    const double fd = (energy(u + eps * v, q).total - energy(u - eps * v, q).total) / (2.0 * eps);
    const double an = inner(gradient(u, q), v);
    worst_g = std::max(worst_g, std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)));
    const RadialField jfd = (1.0 / (2.0 * eps)) * (gradient(u + eps * v, q) - gradient(u - eps * v, q));
    const RadialField jv = jacobian_action(u, q, v);
    worst_j = std::max(worst_j, max_abs_diff(jfd, jv) / jv.sup_norm());
  }
  Outcome o;
  o.passed = worst_g <= 1e-6 && worst_j <= 1e-6;
  o.detail = "20 pairs: worst gradient rel error " + fmt("%.3e", worst_g) + ", worst Jacobian rel error " +
             fmt("%.3e", worst_j) + " (<= 1e-6)";
  return o;
}

// 3. Algebraic bound identity.
Outcome bound_identity_check() {
  const GridPtr g = build_uniform(5.0, 513);
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int fields = 0;
  for (double q : {3.0, 3.5, 4.0, 4.9}) {
    for (int p = 0; p < 25; ++p, ++fields) {
      const RadialField u = random_field(g, rng, 2.0);
      const EnergyReport e = energy(u, q);
      const double scale = std::abs(e.kinetic) + std::abs(e.mass) + std::abs(e.coulomb) + std::abs(e.power);
      worst = std::max(worst, std::abs(bound_identity(u, q)) / scale);
    }
  }
  Outcome o;
  o.passed = worst <= 1e-12;
  o.detail = std::to_string(fields) + " fields: worst rel value " + fmt("%.3e", worst) + " (<= 1e-12)";
  return o;
}

// 4. Dissipation law on random trajectories.
Outcome dissipation() {
  const GridPtr g = build_uniform(5.0, 512);
  std::mt19937_64 rng(4);
  FlowConfig cfg;
  int steps = 0;
  int bad_monotone = 0;
  int bad_balance = 0;
  double worst_ratio = 0.0;
  Outcome o;
  for (int trial = 0; trial < 5; ++trial) {
    const FlowTrajectory tr = integrate(random_field(g, rng, 3.0), 3.5, cfg);
    ++g_c4_trajectories;
    if (tr.nodal_monotonicity_violation() >= 0) ++g_c4_violations;
    for (std::size_t i = 1; i < tr.steps.size(); ++i) {
      if (tr.steps[i].nodal_count > tr.steps[i - 1].nodal_count) {
        ++g_c4_violations;
        break;
      }
    }
    for (const StepRecord& s : tr.steps) {
      ++steps;
      const double de = s.energy - s.energy_before;
      const double work = s.dt * s.ut_norm * s.ut_norm;
      if (de > 1e-10) ++bad_monotone;
      const double ratio = work > 0.0 ? std::abs(de + work) / work : (de == 0.0 ? 0.0 : INFINITY);
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 0.2) ++bad_balance;
    }
    o.info.push_back("trajectory " + std::to_string(trial + 1) + ": " + to_string(tr.verdict) + ", " +
                     std::to_string(tr.steps.size()) + " steps");
  }
  o.passed = bad_monotone == 0 && bad_balance == 0;
  o.detail = std::to_string(steps) + " accepted steps: " + std::to_string(bad_monotone) + " energy increases, " +
             std::to_string(bad_balance) + " balance violations, worst |dE + dt|u_t|^2| / dt|u_t|^2 = " +
             fmt("%.3f", worst_ratio) + " (<= 0.2)";
  return o;
}

// 6. Nodal solutions through the CLI.
Outcome existence() {
  struct Case {
    int k;
    double q;
    double radius;
  };
  const std::vector<Case> cases = {{2, 3.5, 5}, {3, 3.5, 5}, {2, 3.0, 5}, {2, 3.5, 10}};
  Outcome o;
  for (const Case& c : cases) {
    std::ostringstream name;
    name << "k" << c.k << "_q" << c.q << "_R" << c.radius;
    const fs::path dir = g_out / ("c6_" + name.str());
    fs::remove_all(dir);
    std::ostringstream args;
    args << "find-nodal --k " << c.k << " --q " << c.q << " --radius " << c.radius << " --density 200";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = cli(args.str(), dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string verdict;
    bool ok = rc == 0;
    if (!ok) {
      verdict = "exit " + std::to_string(rc) + ": " + first_line(slurp(dir / "stderr.txt"));
    } else {
      const json s = load(dir / "summary.json");
      const json log = load(dir / "search_log.json");
      g_c6_logs.emplace_back(name.str(), log);
      const double sup = log["sup_norm"];
      const double res = s["residual_inf"];
      const double nehari = log["nehari_value"];
      const double h1 = log["h1_norm_sq"];
      const double e = s["energy"]["total"];
      const double ck = log["basis"]["c_k"].is_null() ? INFINITY : log["basis"]["c_k"].get<double>();
      double min_amp = INFINITY;
      for (const auto& x : s["nodal"]["extrema"]) min_amp = std::min(min_amp, std::abs(x["value"].get<double>()));
      const bool res_ok = res <= 1e-8 * (1.0 + sup);
      const bool count_ok = s["nodal"]["count"] == c.k - 1;
      const bool nehari_ok = std::abs(nehari) <= 1e-6 * h1;
      const bool amp_ok = min_amp >= 0.99;
      const bool energy_ok = e <= ck;
      const bool time_ok = secs < 600.0;
      ok = res_ok && count_ok && nehari_ok && amp_ok && energy_ok && time_ok && !artifact_error(dir);
      std::ostringstream v;
      v << "residual " << fmt("%.2e", res) << (res_ok ? "" : " (too large)") << ", count " << s["nodal"]["count"]
        << ", |nehari|/|u|^2 " << fmt("%.1e", std::abs(nehari) / h1) << ", min extremum " << fmt("%.3f", min_amp)
        << ", E " << fmt("%.6g", e) << " <= C_k " << fmt("%.3g", ck) << ", route " << log["route"].get<std::string>()
        << ", innermost domain " << log["innermost_domain_nodes"] << " nodes";
      verdict = v.str();
    }
    o.passed = o.passed && ok;
    o.info.push_back(std::string(ok ? "pass " : "FAIL ") + name.str() + " (" + fmt("%.1f", secs) + " s): " + verdict);
  }

  // Informational only: the q = 3 case with the M_k < 1/k requirement lifted.
  const fs::path diag = g_out / "c6_k2_q3_R5_relaxed";
  fs::remove_all(diag);
  const int rc = cli("find-nodal --k 2 --q 3 --radius 5 --density 200 --relax-q3", diag);
  if (rc == 0) {
    const json s = load(diag / "summary.json");
    const json log = load(diag / "search_log.json");
    o.info.push_back("info k2_q3_R5 with M_k < 1/k not enforced: exit 0, E " +
                     fmt("%.6g", s["energy"]["total"].get<double>()) + ", count " +
                     std::to_string(s["nodal"]["count"].get<int>()) + ", M_k " +
                     fmt("%.4g", log["basis"]["m_k"].get<double>()) + " (1/k = 0.5), C_k infinite");
  } else {
    o.info.push_back("info k2_q3_R5 with M_k < 1/k not enforced: exit " + std::to_string(rc));
  }
  o.detail = "4 cases via find-nodal at density 200";
  return o;
}

// 5. Zero-count monotonicity over criteria 4 and 6.
Outcome zero_count() {
  int trajectories = g_c4_trajectories;
  int violations = g_c4_violations;
  for (const auto& [name, log] : g_c6_logs) {
    trajectories += log["trajectories_audited"].get<int>();
    violations += log["nodal_monotonicity_violations"].get<int>();
  }
  Outcome o;
  o.passed = violations == 0 && trajectories > 0;
  o.detail = std::to_string(trajectories) + " trajectories (" + std::to_string(g_c4_trajectories) +
             " from criterion 4, " + std::to_string(trajectories - g_c4_trajectories) + " from " +
             std::to_string(g_c6_logs.size()) + " accepted criterion 6 runs): " + std::to_string(violations) +
             " violations";
  return o;
}

// 7. Radius sweep through the CLI.
Outcome uniformity() {
  const fs::path dir = g_out / "c7_sweep";
  fs::remove_all(dir);
  const int rc = cli("sweep --k 2 --q 3.5 --radii 5,10,20 --density 200 --jobs 1", dir);
  Outcome o;
  if (!fs::exists(dir / "sweep_report.json")) {
    o.passed = false;
    o.detail = "sweep exit " + std::to_string(rc) + ": " + first_line(slurp(dir / "stderr.txt"));
    return o;
  }
  const json r = load(dir / "sweep_report.json");
  const auto d = r["profile_distances"].get<std::vector<double>>();
  const bool cauchy = d.size() == 2 && d[1] <= d[0];
  o.passed = rc == 0 && r["all_accepted"] == true && r["energy_bound"] == true && r["h1_bound"] == true &&
             r["crossings_agree"] == true && cauchy;
  std::ostringstream v;
  v << "all accepted " << r["all_accepted"] << ", E <= C_k " << r["energy_bound"] << ", |u|^2 <= 4 C_k "
    << r["h1_bound"] << ", crossings within 5% " << r["crossings_agree"];
  if (d.size() == 2) v << ", sup_[0,5] distances " << fmt("%.3e", d[0]) << " -> " << fmt("%.3e", d[1]);
  o.detail = v.str();
  for (const auto& e : r["entries"]) {
    if (e["accepted"] == true) {
      o.info.push_back("R=" + fmt("%g", e["radius"].get<double>()) + ": E " + fmt("%.10g", e["energy"].get<double>()) +
                       ", |u|^2 " + fmt("%.6g", e["h1_norm_sq"].get<double>()) + ", outer crossing " +
                       fmt("%.6f", e["crossings"].back().get<double>()));
    } else {
      o.info.push_back("R=" + fmt("%g", e["radius"].get<double>()) + ": " + e["error"].get<std::string>());
    }
  }
  return o;
}

// 8. Persistence of the nodal count along the flow from a perturbed candidate.
Outcome persistence() {
  Outcome o;
  const fs::path cand = g_out / "c6_k2_q3.5_R5" / "profile.csv";
  if (!fs::exists(cand)) {
    o.passed = false;
    o.detail = "no accepted k=2 candidate from criterion 6";
    return o;
  }
  for (const char* eps : {"1e-6", "-1e-6"}) {
    const fs::path dir = g_out / (std::string("c8_perturb_") + eps);
    fs::remove_all(dir);
    const int rc = cli("flow --k 2 --q 3.5 --init " + cand.string() + " --perturb " + eps +
                           " --t-max 50 --stagnation-rel 1e-300",
                       dir);
    if (rc != 0) {
      o.passed = false;
      o.info.push_back(std::string("perturbation ") + eps + ": exit " + std::to_string(rc));
      continue;
    }
    const json f = load(dir / "flow.json");
    const double t_end = f["t_end"];
    int lo = 1 << 30;
    int hi = -1;
    for (const auto& s : f["snapshots"]) {
      lo = std::min(lo, s["nodal_count"].get<int>());
      hi = std::max(hi, s["nodal_count"].get<int>());
    }
    std::ifstream hist(dir / "energy_history.csv");
    std::string line;
    std::getline(hist, line);
    while (std::getline(hist, line)) {
      const int nc = std::stoi(line.substr(line.rfind(',') + 1));
      lo = std::min(lo, nc);
      hi = std::max(hi, nc);
    }
    const bool reached = t_end >= 50.0 - 1e-9;
    const bool ok = reached && lo == 1 && hi == 1;
    // Only the +1e-6 run is the criterion; the -1e-6 run is reported for context.
    if (std::string(eps) == "1e-6") o.passed = ok;
    o.info.push_back(std::string(eps[0] == '-' ? "info " : "") + "perturbation " + eps + " w_1: verdict " +
                     f["verdict"].get<std::string>() + " at t = " + fmt("%.4g", t_end) + ", nodal count range [" +
                     std::to_string(lo) + ", " + std::to_string(hi) + "]" +
                     (reached ? "" : ", trajectory ends before t_max = 50"));
  }
  o.detail = "flow from the k=2 candidate + 1e-6 w_1 over t_max = 50";
  return o;
}

// 9. Symmetries.
Outcome symmetry() {
  const GridPtr g = build_uniform(5.0, 512);
  std::mt19937_64 rng(9);
  double step_err = 0.0;
  double energy_err = 0.0;
  for (int p = 0; p < 5; ++p) {
    const RadialField u = random_field(g, rng, 3.0);
    step_err = std::max(step_err, max_abs_diff(step(-u, 3.5, 1e-3), -step(u, 3.5, 1e-3)));
    energy_err = std::max(energy_err, std::abs(energy(-u, 3.5).total - energy(u, 3.5).total));
  }
  FlowConfig cfg;
  cfg.t_max = 5.0;
  const RadialField u0 = random_field(g, rng, 3.0);
  const FlowTrajectory a = integrate(u0, 3.5, cfg);
  const FlowTrajectory b = integrate(-u0, 3.5, cfg);
  const double flow_err =
      a.steps.size() == b.steps.size() && a.verdict == b.verdict ? max_abs_diff(a.final_state, -b.final_state) : INFINITY;

  Outcome o;
  double pair_err = INFINITY;
  const fs::path cand = g_out / "c6_k2_q3.5_R5" / "profile.csv";
  if (fs::exists(cand)) {
    std::ifstream in(cand);
    std::string line;
    std::getline(in, line);
    std::vector<double> r;
    std::vector<double> v;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string x, y;
      std::getline(row, x, ',');
      std::getline(row, y, ',');
      r.push_back(std::stod(x));
      v.push_back(std::stod(y));
    }
    const RadialField u(build_uniform(r.back(), static_cast<int>(r.size())), v);
    const EquilibriumCandidate plus = refine_to_tolerance(u, 3.5);
    const EquilibriumCandidate minus = refine_to_tolerance(-u, 3.5);
    pair_err = std::max({max_abs_diff(minus.u, -plus.u), std::abs(minus.energy.total - plus.energy.total),
                         std::abs(minus.residual_inf - plus.residual_inf)});
    pair_err = std::max(pair_err, static_cast<double>(minus.nodal.count != plus.nodal.count));
  }
  o.passed = step_err <= 1e-10 && energy_err <= 1e-10 && flow_err <= 1e-10 && pair_err <= 1e-10;
  o.detail = "step " + fmt("%.1e", step_err) + ", integrate " + fmt("%.1e", flow_err) + ", E(-u)-E(u) " +
             fmt("%.1e", energy_err) + ", +-candidate " + fmt("%.1e", pair_err) + " (<= 1e-10)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else if (a == "--expect-fail" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) expected.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--out DIR] [--expect-fail LIST]\n");
      return 2;
    }
  }
  fs::create_directories(g_out);

  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  // Criterion 5 reads the trajectories of 4 and 6, so it runs after them.
  const std::vector<Criterion> order = {
      {1, "kernel oracle", 1.0, kernel_oracle},
      {2, "gradient consistency", 10.0, gradient_consistency},
      {3, "bound identity", 5.0, bound_identity_check},
      {4, "dissipation law", 60.0, dissipation},
      {6, "nodal solutions", 2400.0, existence},
      {5, "zero-count monotonicity", 60.0, zero_count},
      {7, "radius uniformity", 2700.0, uniformity},
      {8, "parabolic persistence", 300.0, persistence},
      {9, "symmetry suite", 60.0, symmetry},
  };

  std::vector<std::pair<int, std::string>> lines;
  std::set<int> failed;
  for (const Criterion& c : order) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget) {
      o.passed = false;
      o.detail += ", over the " + fmt("%g", c.budget) + " s budget";
    }
    if (!o.passed) failed.insert(c.id);
    std::ostringstream line;
    line << "criterion " << c.id << " " << (o.passed ? "PASS" : "FAIL") << "  " << c.name << " ["
         << fmt("%.2f", secs) << " s] " << o.detail << "\n";
    for (const auto& extra : o.info) line << "    " << extra << "\n";
    lines.emplace_back(c.id, line.str());
  }
  std::sort(lines.begin(), lines.end());
  std::ofstream report(g_out / "acceptance_report.txt");
  for (const auto& [id, text] : lines) {
    std::fputs(text.c_str(), stdout);
    report << text;
  }

  std::printf("failing criteria: ");
  for (int id : failed) std::printf("%d ", id);
  std::printf("%s\n", failed.empty() ? "none" : "");
  if (failed != expected) {
    std::printf("failing set differs from the expected set\n");
    return 1;
  }
  if (!expected.empty()) std::printf("failing set matches the expected set (known failures, see README)\n");
  return 0;
}
