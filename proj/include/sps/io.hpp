#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sps/basis.hpp"
#include "sps/flow.hpp"
#include "sps/search.hpp"
#include "sps/sweep.hpp"

namespace sps {

/// summary.json for a search result. Keys: k, q, radius, energy, nodal,
/// residual_inf, residual_l2, threshold, newton_iterations.
nlohmann::json summary_json(const SearchResult& result, int k);

/// Empty if `summary` has exactly the summary.json keys with the right types,
/// otherwise a description of the first problem.
std::optional<std::string> summary_schema_error(const nlohmann::json& summary);

/// Writes summary.json, profile.csv (r,u,phi), energy_history.csv
/// (t,E,ut_norm,nodal_count) and search_log.json into `dir`, then re-reads
/// and validates them. Throws std::runtime_error on I/O or schema failure.
void write_candidate_artifacts(const std::filesystem::path& dir, const SearchResult& result, const WkBasis& basis);

/// Artifacts of a plain flow run. summary.json follows the candidate schema
/// for the final state (threshold amplitudes null, newton_iterations 0);
/// flow.json carries the verdict and the monotonicity audits.
void write_flow_artifacts(const std::filesystem::path& dir, const FlowTrajectory& trajectory, int k, double q,
                          const std::vector<double>& direction);

/// sweep_report.json, crossings.csv and one candidate directory per accepted
/// radius (R_<radius>).
void write_sweep_artifacts(const std::filesystem::path& dir, const SweepReport& report);

nlohmann::json sweep_json(const SweepReport& report);

/// Checks that `dir` contains the three mandatory artifacts and that their
/// headers and summary schema are valid.
std::optional<std::string> artifact_error(const std::filesystem::path& dir);

}  // namespace sps
