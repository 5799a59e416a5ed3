#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "pbc/io.hpp"

namespace pbc {

// Each command writes into `out_dir` (created if needed) and returns the
// report it wrote as report.json.
//
//   fit:         bundle.json, report.json, history.ndjson
//   stream:      report.json, trajectory.ndjson
//   synth-bench: report.json, per_cluster.ndjson
nlohmann::json cmd_fit(const RunConfig& config, const std::filesystem::path& out_dir);
nlohmann::json cmd_stream(const RunConfig& config, const std::filesystem::path& out_dir);
nlohmann::json cmd_synth_bench(const RunConfig& config, const std::filesystem::path& out_dir);

// Report content without the wall-clock field, for replay comparisons.
nlohmann::json numerical_content(nlohmann::json report);

}  // namespace pbc
