#pragma once

// Quantum Lyapunov exponent from twin conditional trajectories that share
// one measurement record (same dW and same LO phase), with periodic
// Benettin-style resets of the shadow state.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qduff/control.hpp"
#include "qduff/fock.hpp"
#include "qduff/sse.hpp"

namespace qduff {

struct TwinTrajectory {
  FockState fiducial;
  FockState shadow;
  double d0 = 0.0;
  double d_base = 0.0;  ///< measured separation at the start of the window
  std::vector<double> window_logs;
  double t_elapsed = 0.0;
};

/// d_t = |centroid(fiducial) - centroid(shadow)| in (Q, P).
double separation(const TwinTrajectory& pair);

/// Coherent fiducial at alpha0 and a shadow displaced by d0 along Q.
TwinTrajectory initialize_twins(std::complex<double> alpha0, double d0, const SimParams& params);

/// Well-minimum start Q = 1/beta, P = 0.
std::complex<double> default_initial_alpha(const SimParams& params);

/// Closes a window of length `duration`: logs ln(d_t/d_base) (when `record`)
/// and re-displaces the shadow from the fiducial by d0 along the current
/// separation direction. d_base becomes the measured post-reset distance.
void reset_shadow(TwinTrajectory& pair, double duration, bool record = true);

struct TwinOptions {
  double t_end = 1000.0;
  double reset_period = 0.0;  ///< 0 selects one drive period
  double transient = -1.0;    ///< < 0 selects 50 drive periods
  std::optional<std::complex<double>> alpha0;
  bool swap_initial = false;
  long series_stride = 0;  ///< record (t, Q, P, d, phi) every n steps; 0 disables
  double peak_floor = kRelativePeakFloor;  ///< relative to the pdf maximum
};

struct TwinSample {
  double t, q, p, d, phi;
};

struct TwinRun {
  bool ok = true;
  std::string error;
  double lambda = 0.0;
  std::vector<double> window_logs;
  double t_elapsed = 0.0;
  double window_duration = 0.0;
  long transient_windows = 0;
  double max_tail = 0.0;
  long tail_warnings = 0;
  double abort_time = 0.0;
  std::vector<TwinSample> series;
};

TwinRun run_twin(const SimParams& params, const ControlStrategy& strategy, std::uint64_t seed,
                 const TwinOptions& options);

struct LyapunovEstimate {
  std::vector<double> per_seed_lambda;
  double mean = 0.0;
  double two_se = 0.0;
  bool partial = false;
  std::vector<std::string> failures;
};

/// Mean and twice the standard error of the mean, sigma/sqrt(n) with the
/// population standard deviation; summed in index order.
LyapunovEstimate summarize_lambdas(std::span<const double> values);

LyapunovEstimate ensemble_lambda(const SimParams& params, const ControlStrategy& strategy,
                                 std::span<const std::uint64_t> seeds, const TwinOptions& options,
                                 unsigned workers = 0);

}  // namespace qduff
