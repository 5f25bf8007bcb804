#pragma once

#include "sdmdp/instances/instances.hpp"
#include "sdmdp/pkd/regret_trace.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sdmdp {

/// One experiment file. Paths are relative to the file's directory.
///
///   {"name": "...",
///    "instance": {"file": "inst.json"} | {"generator": "random" | "hard" | "code", ...},
///    "algorithms": ["mvp_delayed_known", "mvp_delayed_unknown", "pkd_generic", "random_policy",
///                   "mvp_delayed"],
///    "delay_mode": "known" | "unknown",      // resolves "mvp_delayed"
///    "episodes": K, "delta": 0.1, "seeds": [...], "oracle_stride": 10,
///    "replan": "every_episode" | "doubling", "budget": 10000000,
///    "snapshot_every": 0, "output": "out",
///    "sweep": {"d_max": [2, 4, 8]}}           // generator parameters
struct ExperimentConfig {
  std::string name = "experiment";
  nlohmann::json instance;
  std::vector<std::string> algorithms;
  std::string delay_mode = "known";
  int episodes = 1;
  double delta = 0.1;
  std::vector<std::uint64_t> seeds;
  int oracle_stride = 10;
  ReplanSchedule replan = ReplanSchedule::kEveryEpisode;
  std::size_t budget = 10'000'000;
  int snapshot_every = 0;
  std::filesystem::path output;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> sweep;
  std::filesystem::path base_dir;
  nlohmann::json raw;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

struct RunFailure {
  std::string cell;
  std::uint64_t seed = 0;  // 0 with seed_level = false: the cell setup failed
  bool seed_level = true;
  bool resource = false;
  std::string message;
};

struct ExperimentResult {
  nlohmann::json manifest;
  std::vector<std::filesystem::path> traces;
  std::vector<RunFailure> failures;
  bool resource_failure() const;
};

/// Runs every (cell, seed) pair on `jobs` worker threads. Each trace goes to
/// <output>/<cell>__seed<seed>.csv; manifest.json records hashes of the
/// config, instances and traces plus the code version. Failures are
/// recorded per cell and do not stop the run.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

std::string sha256_hex(const std::string& bytes);
std::string code_version();

struct CellSummary {
  std::string cell;
  std::vector<std::uint64_t> seeds;
  int episodes = 0;
  double median_final = 0.0;
  double q1_final = 0.0;
  double q3_final = 0.0;
  /// Least-squares slope of log median cumulative regret on log k over [K/2, K].
  double slope = 0.0;
};

/// Cells named <base>.<key>=<number> grouped by (base, key) and ordered by the value.
struct ScalingVerdict {
  std::string base;
  std::string key;
  std::vector<std::pair<double, double>> medians;  // (value, median final regret)
  bool strictly_increasing = false;
};

struct SummaryReport {
  std::vector<CellSummary> cells;
  std::vector<ScalingVerdict> scaling;
};

/// Deterministic aggregation of trace files named <cell>__seed<seed>.csv.
/// Throws ValidationError with file and line on malformed input.
SummaryReport summarize(std::vector<std::filesystem::path> files);
nlohmann::json to_json(const SummaryReport& r);
std::string format_summary(const SummaryReport& r);

/// Slope of log y on log k for k in [ceil(K/2), K] using positive entries; NaN
/// when fewer than two points qualify.
double loglog_slope(const std::vector<double>& cumulative);
/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> xs, double q);

/// Expands a shell glob; results sorted.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

}  // namespace sdmdp
