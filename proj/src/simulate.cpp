#include "qduff/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qduff/lyapunov.hpp"

namespace qduff {

SimulateResult simulate_trajectory(const SimParams& params, const ControlStrategy& strategy,
                                   std::uint64_t seed, const SimulateOptions& options) {
  params.validate();
  strategy.validate();
  const double dt = params.dt;
  const long total_steps = std::lround(options.t_end / dt);
  std::vector<long> snap_steps;
  for (double t : options.snapshot_times) {
    const long k = std::lround(t / dt);
    if (k >= 0 && k <= total_steps) snap_steps.push_back(k);
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  SimulateResult res;
  res.homodyne.dt = dt;
  FockState state = coherent_state(options.alpha0.value_or(default_initial_alpha(params)), params.N);
  SseStepper stepper(params);
  Controller controller(strategy, params.N);
  NoiseStream noise(seed, dt);
  const long stride = std::max(1L, options.series_stride);

  std::size_t next_snap = 0;
  double phi = controller.phase();
  double tail = tail_weight(state);
  long k = 0;
  try {
    for (; k <= total_steps; ++k) {
      const double t = k * dt;
      if (k < total_steps) {
        phi = controller.tick(state, k);
        if (options.record_peaks && controller.last_estimate() &&
            (k % strategy.update_interval == 0)) {
          const auto& est = *controller.last_estimate();
          res.peaks.push_back({k, est.theta_max, est.peak_counts});
        }
      }
      if (k % stride == 0 || k == total_steps) {
        const PhasePoint c = centroid(state);
        res.series.push_back({t, c.q, c.p, phi, tail});
      }
      while (next_snap < snap_steps.size() && snap_steps[next_snap] == k) {
        res.snapshots.push_back({t, state});
        ++next_snap;
      }
      if (k == total_steps) break;
      const double dW = noise.next();
      const StepReport r = stepper.step(state, phi, dW, t,
                                        options.record_homodyne ? &res.homodyne : nullptr);
      if (options.record_homodyne) res.phases.push_back(phi);
      tail = r.tail;
      res.max_tail = std::max(res.max_tail, r.tail);
      if (r.tail_warning) ++res.tail_warnings;
    }
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "aborted at t = " << k * dt << ": " << e.what();
    res.ok = false;
    res.error = msg.str();
    res.abort_time = k * dt;
  }
  res.final_state = state;
  return res;
}

}  // namespace qduff
