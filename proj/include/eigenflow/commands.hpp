#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "eigenflow/config.hpp"

namespace eigenflow::cli {

struct RunContext {
  std::uint64_t seed = 0;
  /// Output directory (created on demand).
  std::string out_dir = "out";
};

/// Writes mesh.txt; returns the mesh summary (also written as mesh.json).
nlohmann::json cmd_mesh(const FlowConfig& config, const RunContext& ctx);

/// Writes flow.csv (t, j, Lambda, lambda; j 1-based); returns a summary.
nlohmann::json cmd_flow(const FlowConfig& config, const RunContext& ctx);

/// Derivative report for the cluster holding target.branch at target.t0:
/// T1 route, crossing-form route, boundary-integral route, second-order
/// expansion and the FD oracle with deviations. Written as derivative.json.
nlohmann::json cmd_derivative(const FlowConfig& config, const RunContext& ctx);

/// Maslov index over [tau, 1] at target.lambda0 plus the spectral count.
/// Written as maslov.json.
nlohmann::json cmd_maslov(const FlowConfig& config, const RunContext& ctx);

/// Runs the acceptance suite; writes verify.json. Sets `all_passed`.
nlohmann::json cmd_verify(const RunContext& ctx, bool& all_passed);

/// Timestamp and invocation details, kept apart so the reports stay byte-identical.
void write_metadata(const RunContext& ctx, const std::string& command, const std::string& config_path, int threads);

/// Serialized exactly as written to disk (sorted keys, 2-space indent).
std::string dump(const nlohmann::json& j);

}  // namespace eigenflow::cli
