#pragma once

// Lyapunov sweeps over (beta, strategy, seed) jobs with deterministic
// seeding, a bounded worker pool and index-ordered commits.
//
// Output layout under config.output_dir:
//   jobs/<beta>_<strategy>_s<k>.csv          window logs of one twin run
//   jobs/<beta>_<strategy>_s<k>_series.csv   optional (t, Q, P, d, phi) series
//   lambda_per_seed.csv                      one row per job
//   summary.json                             one row per (beta, strategy)
//   manifest.json                            config echo, jobs, file index

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qduff/config.hpp"
#include "qduff/lyapunov.hpp"

namespace qduff {

/// Version tag written into manifests.
inline constexpr const char* kVersion = "qduff 1.0.0";

struct JobRecord {
  std::size_t index = 0;
  double beta = 0.0;
  std::string strategy;
  int seed_index = 0;
  std::uint64_t seed = 0;
  TwinRun run;
  double wall_seconds = 0.0;
};

struct SummaryRow {
  double beta = 0.0;
  std::string strategy;
  LyapunovEstimate estimate;
};

struct RunManifest {
  std::vector<JobRecord> jobs;
  std::vector<SummaryRow> summary;
  std::vector<std::string> warnings;
  std::vector<std::string> files;  ///< relative to the output directory
  double wall_seconds = 0.0;
  bool partial = false;
};

/// Seeds are shared across beta and strategy: seed k of every cell is
/// derive_seed(master_seed, k), so strategies are compared on the same
/// noise realizations.
RunManifest run_sweep(const ExperimentConfig& config, std::ostream* log = nullptr);

/// The deterministic part of the outputs, as written to summary.json.
std::string summary_json(const ExperimentConfig& config, const std::vector<SummaryRow>& rows);

/// Config echo used in manifests.
std::string config_json(const ExperimentConfig& config);

/// File-name friendly strategy label ("fixed:0.5" -> "fixed_0.5").
std::string strategy_slug(const std::string& label);

}  // namespace qduff
