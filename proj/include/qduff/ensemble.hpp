#pragma once

// Unconditional (ensemble-averaged) state from many conditional
// trajectories.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "qduff/control.hpp"
#include "qduff/fock.hpp"
#include "qduff/sse.hpp"

namespace qduff {

/// Running sum of |psi><psi| (or of density matrices) with a sample count.
class EnsembleAccumulator {
 public:
  explicit EnsembleAccumulator(Eigen::Index dim);

  void add(const FockState& state);
  void add(const Eigen::MatrixXcd& rho, long samples = 1);
  void merge(const EnsembleAccumulator& other);

  long count() const { return count_; }
  Eigen::Index dim() const { return sum_.rows(); }
  Eigen::MatrixXcd mean() const;

 private:
  Eigen::MatrixXcd sum_;
  long count_ = 0;
};

/// Average of |psi><psi| over the snapshots; all must share one dimension.
Eigen::MatrixXcd accumulate_ensemble_state(std::span<const FockState> snapshots);

double purity(const Eigen::MatrixXcd& rho);

struct EnsembleOptions {
  double t_end = 1.0;
  std::complex<double> alpha0{0.0, 0.0};
  /// Times at which each trajectory contributes to the averaged state;
  /// empty means the final time only.
  std::vector<double> sample_times;
  unsigned workers = 0;
};

struct EnsembleResult {
  Eigen::MatrixXcd rho;          ///< averaged over trajectories and sample times
  std::vector<double> final_q;   ///< <Q> of each trajectory at t_end
  std::vector<double> final_p;
  long trajectories = 0;
  long failures = 0;
  double max_tail = 0.0;
};

/// Runs trajectories with seeds derive_seed(master_seed, i), i < count,
/// and reduces their contributions in index order, so the result does not
/// depend on the worker count.
EnsembleResult run_ensemble(const SimParams& params, const ControlStrategy& strategy,
                            std::uint64_t master_seed, long count, const EnsembleOptions& options);

}  // namespace qduff
