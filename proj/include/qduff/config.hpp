#pragma once

// Experiment configuration: a YAML document with flat sections
//
//   model:       beta, Gamma, g, Omega
//   integration: N, dt, scheme, signal_gain
//   control:     update_interval, grid_angles_parallel,
//                grid_angles_perpendicular, peak_floor
//   lyapunov:    d0, reset_period, transient
//   sweep:       beta (list), strategy (list), seeds, master_seed, t_end, workers
//   output:      dir, snapshot_every, snapshots (list), series_stride
//
// Every key is optional. Unknown keys and ill-typed values are rejected
// with the dotted key name in the message.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qduff/control.hpp"
#include "qduff/sse.hpp"

namespace qduff {

struct ExperimentConfig {
  SimParams params;

  std::vector<double> betas{0.3};
  std::vector<std::string> strategies{"adaptive-parallel", "fixed:0", "fixed:pi/2",
                                      "adaptive-perpendicular"};
  int seeds = 10;
  std::uint64_t master_seed = 1;
  double t_end = 1000.0;
  unsigned workers = 0;  ///< 0: environment override or hardware threads

  int update_interval = 1;
  int grid_angles_parallel = 8;
  int grid_angles_perpendicular = 32;
  double peak_floor = kRelativePeakFloor;

  double reset_period = 0.0;  ///< 0: one drive period
  double transient = -1.0;    ///< < 0: 50 drive periods

  std::string output_dir = "out";
  double snapshot_every = 10.0;         ///< used when `snapshots` is empty
  std::vector<double> snapshots;        ///< explicit snapshot times
  long series_stride = 0;               ///< per-job (t, Q, P, d, phi) series; 0 disables

  /// Strategies with the configured grid sizes and cadence applied.
  std::vector<ControlStrategy> strategy_list() const;
  /// Snapshot times in [0, t_end].
  std::vector<double> snapshot_times() const;
  void validate() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies a strategy label with the configured grid sizes and cadence.
ControlStrategy configured_strategy(const ExperimentConfig& config, std::string_view label);

/// splitmix64 finalizer applied to master + (index + 1) * 0x9E3779B97F4A7C15.
/// The finalizer is a bijection and the odd increment makes the argument
/// distinct for every index, so seeds never collide for a fixed master.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t job_index);

}  // namespace qduff
