#include "qduff/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "qduff/config.hpp"
#include "qduff/errors.hpp"
#include "qduff/parallel.hpp"

namespace qduff {

EnsembleAccumulator::EnsembleAccumulator(Eigen::Index dim) : sum_(Eigen::MatrixXcd::Zero(dim, dim)) {}

void EnsembleAccumulator::add(const FockState& state) {
  if (state.dim() != dim()) throw ConfigError("ensemble: snapshot dimension mismatch");
  sum_.noalias() += state.coeffs * state.coeffs.adjoint();
  ++count_;
}

void EnsembleAccumulator::add(const Eigen::MatrixXcd& rho, long samples) {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw ConfigError("ensemble: density matrix dimension mismatch");
  }
  sum_ += rho * static_cast<double>(samples);
  count_ += samples;
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  if (other.dim() != dim()) throw ConfigError("ensemble: dimension mismatch");
  sum_ += other.sum_;
  count_ += other.count_;
}

Eigen::MatrixXcd EnsembleAccumulator::mean() const {
  if (count_ == 0) throw ConfigError("ensemble: no samples accumulated");
  return sum_ / static_cast<double>(count_);
}

Eigen::MatrixXcd accumulate_ensemble_state(std::span<const FockState> snapshots) {
  if (snapshots.empty()) throw ConfigError("ensemble: need at least one snapshot");
  EnsembleAccumulator acc(snapshots.front().dim());
  for (const auto& s : snapshots) acc.add(s);
  return acc.mean();
}

double purity(const Eigen::MatrixXcd& rho) { return (rho * rho).trace().real(); }

EnsembleResult run_ensemble(const SimParams& params, const ControlStrategy& strategy,
                            std::uint64_t master_seed, long count, const EnsembleOptions& options) {
  params.validate();
  strategy.validate();
  if (count < 1) throw ConfigError("trajectories: must be >= 1");
  const double dt = params.dt;
  const long total_steps = std::lround(options.t_end / dt);
  std::vector<long> sample_steps;
  for (double t : options.sample_times) {
    const long k = std::lround(t / dt);
    if (k < 0 || k > total_steps) throw ConfigError("sample_times: must lie in [0, t_end]");
    sample_steps.push_back(k);
  }
  if (sample_steps.empty()) sample_steps.push_back(total_steps);
  std::sort(sample_steps.begin(), sample_steps.end());

  struct Partial {
    EnsembleAccumulator acc;
    double q = 0.0, p = 0.0, tail = 0.0;
    bool ok = true;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(count),
                             Partial{EnsembleAccumulator(params.N)});

  parallel_for_index(parts.size(), resolve_workers(options.workers), [&](std::size_t i) {
    Partial& part = parts[i];
    try {
      FockState state = coherent_state(options.alpha0, params.N);
      SseStepper stepper(params);
      Controller controller(strategy, params.N);
      NoiseStream noise(derive_seed(master_seed, i), dt);
      std::size_t next_sample = 0;
      for (long k = 0; k <= total_steps; ++k) {
        while (next_sample < sample_steps.size() && sample_steps[next_sample] == k) {
          part.acc.add(state);
          ++next_sample;
        }
        if (k == total_steps) break;
        const double phi = controller.tick(state, k);
        const StepReport r = stepper.step(state, phi, noise.next(), k * dt);
        part.tail = std::max(part.tail, r.tail);
      }
      const PhasePoint c = centroid(state);
      part.q = c.q;
      part.p = c.p;
    } catch (const std::exception&) {
      part.ok = false;
    }
  });

  EnsembleResult result;
  EnsembleAccumulator total(params.N);
  for (const auto& part : parts) {
    if (!part.ok) {
      ++result.failures;
      continue;
    }
    total.merge(part.acc);
    result.final_q.push_back(part.q);
    result.final_p.push_back(part.p);
    result.max_tail = std::max(result.max_tail, part.tail);
    ++result.trajectories;
  }
  if (result.trajectories == 0) throw NumericalError("ensemble: every trajectory aborted");
  result.rho = total.mean();
  return result;
}

}  // namespace qduff
