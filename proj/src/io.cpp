#include "sps/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sps/energy.hpp"
#include "sps/nodal.hpp"
#include "sps/poisson.hpp"

namespace sps {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json energy_json(const EnergyReport& e) {
  return {{"total", e.total}, {"kinetic", e.kinetic}, {"mass", e.mass}, {"coulomb", e.coulomb}, {"power", e.power}};
}

json nodal_json(const NodalProfile& p) {
  json extrema = json::array();
  for (const Extremum& e : p.extrema) extrema.push_back({{"radius", e.radius}, {"value", e.value}});
  return {{"count", p.count}, {"crossings", p.crossings}, {"extrema", extrema}};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + file.string() + " failed");
}

std::string profile_csv(const RadialField& u) {
  const Potential phi = potential(u);
  std::ostringstream out;
  out << "r,u,phi\n";
  for (int i = 0; i < u.size(); ++i) out << num(u.grid().node(i)) << ',' << num(u[i]) << ',' << num(phi[i]) << '\n';
  return out.str();
}

std::string history_csv(const std::vector<StepRecord>& steps) {
  std::ostringstream out;
  out << "t,E,ut_norm,nodal_count\n";
  for (const StepRecord& s : steps) {
    out << num(s.t) << ',' << num(s.energy) << ',' << num(s.ut_norm) << ',' << s.nodal_count << '\n';
  }
  return out.str();
}

std::string first_line(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  return line;
}

json basis_json(const WkBasis& b) {
  return {{"m_k", b.m_max},
          {"m_k_min", b.m_min},
          {"norms_sq", b.norms_sq},
          {"c_k", number_or_null(energy_upper_bound(b.k, b.m_max, b.q))},
          {"width_factor", b.width_factor},
          {"q3_constraint_met", b.q3_constraint_met},
          {"q3_bound", 1.0 / b.k}};
}

std::string radius_dir(double r) {
  std::ostringstream out;
  out << "R_" << r;
  return out.str();
}

}  // namespace

json summary_json(const SearchResult& result, int k) {
  const EquilibriumCandidate& c = result.candidate;
  json threshold = {{"t_low", result.bracket.direction.empty() ? json(nullptr) : json(result.bracket.t_low)},
                    {"t_high", result.bracket.direction.empty() ? json(nullptr) : json(result.bracket.t_high)},
                    {"direction", result.bracket.direction}};
  return {{"k", k},
          {"q", c.q},
          {"radius", c.radius},
          {"energy", energy_json(c.energy)},
          {"nodal", nodal_json(c.nodal)},
          {"residual_inf", c.residual_inf},
          {"residual_l2", c.residual_l2},
          {"threshold", threshold},
          {"newton_iterations", c.newton_iterations}};
}

std::optional<std::string> summary_schema_error(const json& s) {
  static const std::vector<std::string> top = {"k",      "q",           "radius",      "energy",   "nodal",
                                               "residual_inf", "residual_l2", "threshold", "newton_iterations"};
  if (!s.is_object()) return "summary is not an object";
  if (s.size() != top.size()) return "summary has " + std::to_string(s.size()) + " keys, expected 9";
  for (const auto& key : top) {
    if (!s.contains(key)) return "missing key " + key;
  }
  if (!s["k"].is_number_integer()) return "k must be an integer";
  if (!s["newton_iterations"].is_number_integer()) return "newton_iterations must be an integer";
  for (const char* key : {"q", "radius", "residual_inf", "residual_l2"}) {
    if (!s[key].is_number()) return std::string(key) + " must be a number";
  }
  const json& e = s["energy"];
  if (!e.is_object() || e.size() != 5) return "energy must have 5 keys";
  for (const char* key : {"total", "kinetic", "mass", "coulomb", "power"}) {
    if (!e.contains(key) || !e[key].is_number()) return std::string("energy.") + key + " missing or not a number";
  }
  const json& n = s["nodal"];
  if (!n.is_object() || n.size() != 3) return "nodal must have 3 keys";
  if (!n.contains("count") || !n["count"].is_number_integer()) return "nodal.count missing or not an integer";
  if (!n.contains("crossings") || !n["crossings"].is_array()) return "nodal.crossings missing or not an array";
  if (!n.contains("extrema") || !n["extrema"].is_array()) return "nodal.extrema missing or not an array";
  const json& t = s["threshold"];
  if (!t.is_object() || t.size() != 3) return "threshold must have 3 keys";
  for (const char* key : {"t_low", "t_high"}) {
    if (!t.contains(key) || !(t[key].is_number() || t[key].is_null())) return std::string("threshold.") + key + " invalid";
  }
  if (!t.contains("direction") || !t["direction"].is_array()) return "threshold.direction missing or not an array";
  return std::nullopt;
}

std::optional<std::string> artifact_error(const fs::path& dir) {
  for (const char* name : {"summary.json", "profile.csv", "energy_history.csv"}) {
    if (!fs::exists(dir / name)) return std::string("missing ") + name;
  }
  if (first_line(dir / "profile.csv") != "r,u,phi") return "profile.csv header mismatch";
  if (first_line(dir / "energy_history.csv") != "t,E,ut_norm,nodal_count") return "energy_history.csv header mismatch";
  std::ifstream in(dir / "summary.json");
  json s;
  try {
    in >> s;
  } catch (const json::exception& e) {
    return std::string("summary.json does not parse: ") + e.what();
  }
  return summary_schema_error(s);
}

void write_candidate_artifacts(const fs::path& dir, const SearchResult& result, const WkBasis& basis) {
  fs::create_directories(dir);
  const EquilibriumCandidate& c = result.candidate;
  write_text(dir / "summary.json", summary_json(result, basis.k).dump(2) + "\n");
  write_text(dir / "profile.csv", profile_csv(c.u));
  write_text(dir / "energy_history.csv", history_csv(result.history));

  json attempts = json::array();
  for (const SearchAttempt& a : result.log) attempts.push_back({{"stage", a.stage}, {"outcome", a.outcome}});
  json log = {{"route", to_string(result.route)},
              {"attempts", attempts},
              {"basis", basis_json(basis)},
              {"nehari_value", c.nehari},
              {"h1_norm_sq", h1_norm_sq(c.u)},
              {"sup_norm", c.u.sup_norm()},
              {"innermost_domain_nodes", innermost_domain_nodes(c.u)},
              {"residual_history", c.residual_history},
              {"bisection_probes", result.bracket.probes.size()},
              {"trajectories_audited", result.trajectories},
              {"nodal_monotonicity_violations", result.nodal_violations}};
  write_text(dir / "search_log.json", log.dump(2) + "\n");

  if (auto err = artifact_error(dir)) throw std::runtime_error("artifact check failed in " + dir.string() + ": " + *err);
}

void write_flow_artifacts(const fs::path& dir, const FlowTrajectory& tr, int k, double q,
                          const std::vector<double>& direction) {
  fs::create_directories(dir);
  const RadialField& u = tr.final_state;
  const Potential phi = potential(u);
  const RadialField g = gradient(u, phi, q);
  double res_inf = 0.0;
  for (double x : g.values()) res_inf = std::max(res_inf, std::abs(x));
  json summary = {{"k", k},
                  {"q", q},
                  {"radius", u.grid().radius()},
                  {"energy", energy_json(energy(u, phi, q))},
                  {"nodal", nodal_json(sign_changes(u))},
                  {"residual_inf", res_inf},
                  {"residual_l2", l2_norm(g)},
                  {"threshold", {{"t_low", nullptr}, {"t_high", nullptr}, {"direction", direction}}},
                  {"newton_iterations", 0}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_text(dir / "profile.csv", profile_csv(u));
  write_text(dir / "energy_history.csv", history_csv(tr.steps));

  json snaps = json::array();
  for (const Snapshot& s : tr.snapshots) {
    snaps.push_back({{"t", s.t}, {"energy", s.energy}, {"ut_norm", number_or_null(s.ut_norm)}, {"nodal_count", s.nodal_count}});
  }
  json flow = {{"verdict", to_string(tr.verdict)},
               {"t_end", tr.steps.empty() ? 0.0 : tr.steps.back().t},
               {"accepted_steps", tr.steps.size()},
               {"rejected_steps", tr.rejected_steps},
               {"nodal_monotonicity_violation", tr.nodal_monotonicity_violation()},
               {"energy_monotonicity_violation", tr.energy_monotonicity_violation()},
               {"snapshots", snaps}};
  write_text(dir / "flow.json", flow.dump(2) + "\n");

  if (auto err = artifact_error(dir)) throw std::runtime_error("artifact check failed in " + dir.string() + ": " + *err);
}

json sweep_json(const SweepReport& rep) {
  json entries = json::array();
  for (const SweepEntry& e : rep.entries) {
    json item = {{"radius", e.radius}, {"accepted", e.result.has_value()}};
    if (e.result) {
      const EquilibriumCandidate& c = e.result->candidate;
      item["route"] = to_string(e.result->route);
      item["energy"] = c.energy.total;
      item["h1_norm_sq"] = h1_norm_sq(c.u);
      item["nodal_count"] = c.nodal.count;
      item["crossings"] = c.nodal.crossings;
      item["sup_norm"] = c.u.sup_norm();
      item["residual_inf"] = c.residual_inf;
      item["strauss_envelope"] = strauss_envelope(c.u);
    } else {
      item["error"] = e.error;
    }
    entries.push_back(item);
  }
  return {{"k", rep.k},
          {"q", rep.q},
          {"density", rep.density},
          {"radii", rep.radii},
          {"m_k", rep.m_k},
          {"c_k", number_or_null(rep.c_k)},
          {"entries", entries},
          {"all_accepted", rep.all_accepted},
          {"energy_bound", rep.energy_bound},
          {"h1_bound", rep.h1_bound},
          {"probe_radius", rep.probe_radius},
          {"profile_distances", rep.distances},
          {"outer_crossings", rep.outer_crossings},
          {"crossings_agree", rep.crossings_agree},
          {"strauss", rep.strauss}};
}

void write_sweep_artifacts(const fs::path& dir, const SweepReport& rep) {
  fs::create_directories(dir);
  write_text(dir / "sweep_report.json", sweep_json(rep).dump(2) + "\n");

  std::ostringstream csv;
  csv << "radius,outer_crossing,crossings\n";
  for (const SweepEntry& e : rep.entries) {
    if (!e.result) continue;
    const auto& x = e.result->candidate.nodal.crossings;
    csv << num(e.radius) << ',' << (x.empty() ? std::string("nan") : num(x.back())) << ',';
    for (std::size_t i = 0; i < x.size(); ++i) csv << (i ? ";" : "") << num(x[i]);
    csv << '\n';
  }
  write_text(dir / "crossings.csv", csv.str());

  for (const SweepEntry& e : rep.entries) {
    if (!e.result) continue;
    write_candidate_artifacts(dir / radius_dir(e.radius), *e.result, rep.basis);
  }
}

}  // namespace sps
