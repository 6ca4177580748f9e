#include "qduff/lyapunov.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qduff/parallel.hpp"

namespace qduff {

double separation(const TwinTrajectory& pair) {
  const PhasePoint a = centroid(pair.fiducial);
  const PhasePoint b = centroid(pair.shadow);
  return std::hypot(a.q - b.q, a.p - b.p);
}

std::complex<double> default_initial_alpha(const SimParams& params) {
  return {1.0 / (std::numbers::sqrt2 * params.beta), 0.0};
}

TwinTrajectory initialize_twins(std::complex<double> alpha0, double d0, const SimParams& params) {
  if (!(d0 > 0.0)) throw ConfigError("d0: must be > 0");
  TwinTrajectory pair;
  pair.d0 = d0;
  pair.fiducial = coherent_state(alpha0, params.N);
  pair.shadow = displace(pair.fiducial, std::complex<double>(d0 / std::numbers::sqrt2, 0.0));
  pair.d_base = separation(pair);
  return pair;
}

void reset_shadow(TwinTrajectory& pair, double duration, bool record) {
  const PhasePoint f = centroid(pair.fiducial);
  const PhasePoint s = centroid(pair.shadow);
  const double dq = s.q - f.q;
  const double dp = s.p - f.p;
  const double d = std::hypot(dq, dp);
  if (!(d > 0.0)) throw NumericalError("twin trajectories collapsed onto each other (d_t = 0)");
  if (record) {
    pair.window_logs.push_back(std::log(d / pair.d_base));
    pair.t_elapsed += duration;
  }
  // D(alpha) moves the centroid by sqrt(2) alpha in the (Q + iP) plane
  const std::complex<double> alpha =
      (pair.d0 / std::numbers::sqrt2) * std::complex<double>(dq, dp) / d;
  pair.shadow = displace(pair.fiducial, alpha);
  pair.d_base = separation(pair);
}

TwinRun run_twin(const SimParams& params, const ControlStrategy& strategy, std::uint64_t seed,
                 const TwinOptions& options) {
  params.validate();
  strategy.validate();
  const double dt = params.dt;
  const double period = options.reset_period > 0.0 ? options.reset_period : params.drive_period();
  const double transient = options.transient >= 0.0 ? options.transient : 50.0 * params.drive_period();
  const long steps_per_window = std::max(1L, std::lround(period / dt));
  const long total_steps = std::lround(options.t_end / dt);
  const long windows = total_steps / steps_per_window;

  TwinRun run;
  run.window_duration = steps_per_window * dt;
  run.transient_windows = std::lround(transient / run.window_duration);
  if (windows <= run.transient_windows) {
    throw ConfigError("t_end is too short: no Lyapunov windows left after the transient");
  }

  TwinTrajectory pair =
      initialize_twins(options.alpha0.value_or(default_initial_alpha(params)), params.d0, params);
  if (options.swap_initial) std::swap(pair.fiducial, pair.shadow);

  SseStepper stepper(params);
  Controller controller(strategy, params.N, options.peak_floor);
  NoiseStream noise(seed, dt);

  long step = 0;
  double t = 0.0;
  auto sample = [&](double phi) {
    const PhasePoint c = centroid(pair.fiducial);
    run.series.push_back({t, c.q, c.p, separation(pair), phi});
  };

  try {
    for (long w = 0; w < windows; ++w) {
      for (long k = 0; k < steps_per_window; ++k, ++step) {
        const double phi = controller.tick(pair.fiducial, step);
        if (options.series_stride > 0 && step % options.series_stride == 0) sample(phi);
        const double dW = noise.next();
        const StepReport a = stepper.step(pair.fiducial, phi, dW, t);
        const StepReport b = stepper.step(pair.shadow, phi, dW, t);
        t = (step + 1) * dt;
        const double tail = std::max(a.tail, b.tail);
        run.max_tail = std::max(run.max_tail, tail);
        if (a.tail_warning || b.tail_warning) ++run.tail_warnings;
      }
      reset_shadow(pair, run.window_duration, w >= run.transient_windows);
    }
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "aborted at t = " << t << ": " << e.what();
    run.ok = false;
    run.error = msg.str();
    run.abort_time = t;
  }

  run.window_logs = std::move(pair.window_logs);
  run.t_elapsed = pair.t_elapsed;
  if (run.t_elapsed > 0.0) {
    double sum = 0.0;
    for (double v : run.window_logs) sum += v;
    run.lambda = sum / run.t_elapsed;
  }
  return run;
}

LyapunovEstimate summarize_lambdas(std::span<const double> values) {
  LyapunovEstimate est;
  est.per_seed_lambda.assign(values.begin(), values.end());
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  est.two_se = 2.0 * std::sqrt(ss / n) / std::sqrt(n);
  return est;
}

LyapunovEstimate ensemble_lambda(const SimParams& params, const ControlStrategy& strategy,
                                 std::span<const std::uint64_t> seeds, const TwinOptions& options,
                                 unsigned workers) {
  if (seeds.size() < 2) throw ConfigError("seeds: ensemble_lambda needs at least two seeds");
  std::vector<TwinRun> runs(seeds.size());
  parallel_for_index(seeds.size(), resolve_workers(workers),
                     [&](std::size_t i) { runs[i] = run_twin(params, strategy, seeds[i], options); });

  std::vector<double> good;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].ok) {
      good.push_back(runs[i].lambda);
    } else {
      failures.push_back("seed " + std::to_string(seeds[i]) + ": " + runs[i].error);
    }
  }
  LyapunovEstimate est = summarize_lambdas(good);
  est.partial = !failures.empty();
  est.failures = std::move(failures);
  return est;
}

}  // namespace qduff
