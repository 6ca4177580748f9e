#pragma once

// A single monitored trajectory with its time series, homodyne record and
// state snapshots.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qduff/control.hpp"
#include "qduff/fock.hpp"
#include "qduff/sse.hpp"

namespace qduff {

struct SimulateOptions {
  double t_end = 10.0;
  std::optional<std::complex<double>> alpha0;  ///< default: well minimum
  long series_stride = 1;                       ///< steps between series rows
  std::vector<double> snapshot_times;
  bool record_homodyne = true;
  bool record_peaks = false;  ///< keep the peak-count vector of each controller update
};

struct SeriesRow {
  double t, q, p, phi, tail;
};

struct Snapshot {
  double t;
  FockState state;
};

struct PeakRow {
  long step;
  double theta_max;
  std::vector<int> counts;
};

struct SimulateResult {
  bool ok = true;
  std::string error;
  double abort_time = 0.0;
  std::vector<SeriesRow> series;
  HomodyneRecord homodyne;
  std::vector<double> phases;  ///< phi used at each step (homodyne rows)
  std::vector<Snapshot> snapshots;
  std::vector<PeakRow> peaks;
  FockState final_state;
  double max_tail = 0.0;
  long tail_warnings = 0;
};

SimulateResult simulate_trajectory(const SimParams& params, const ControlStrategy& strategy,
                                   std::uint64_t seed, const SimulateOptions& options);

}  // namespace qduff
