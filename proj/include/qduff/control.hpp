#pragma once

// Adaptive local-oscillator phase selection from quadrature peak counts.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qduff/fock.hpp"

namespace qduff {

struct FixedPhase {
  double phi = 0.0;
};
/// Measure along the fringes (phi = theta_max - pi/2): maximizes lambda.
struct AdaptiveParallel {};
/// Measure across the fringes (phi = theta_max): minimizes lambda.
struct AdaptivePerpendicular {};

struct ControlStrategy {
  std::variant<FixedPhase, AdaptiveParallel, AdaptivePerpendicular> variant;
  int grid_angles = 8;
  int update_interval = 1;

  static ControlStrategy fixed(double phi);
  static ControlStrategy adaptive_parallel(int grid_angles = 8);
  static ControlStrategy adaptive_perpendicular(int grid_angles = 32);

  bool adaptive() const { return !std::holds_alternative<FixedPhase>(variant); }
  void validate() const;
};

/// Parses "fixed:ANGLE", "adaptive-parallel", "adaptive-perpendicular".
/// ANGLE accepts a plain number or a multiple of pi such as "pi/2".
ControlStrategy parse_strategy(std::string_view text);
/// Inverse of parse_strategy; fixed angles print with full precision.
std::string strategy_label(const ControlStrategy& s);

struct FringeEstimate {
  double theta_max = 0.0;
  std::vector<int> peak_counts;
};

/// Strict interior local maxima above `floor`; a flat top of equal values
/// counts as one maximum.
int count_peaks(std::span<const double> pdf, double floor = 0.0);

/// Controller grid: 512 points over the covering span for dimension N.
QuadratureGrid controller_grid(Eigen::Index dim);

/// Default peak floor for the fringe search, relative to the largest pdf
/// value at each angle. Far-tail values around 1e-40 otherwise produce
/// spurious round-off maxima.
inline constexpr double kRelativePeakFloor = 1e-10;

/// Peak counts at theta_k = k pi / M; a maximum counts when it exceeds
/// relative_floor * max(pdf at that angle). Ties go to the smallest angle.
FringeEstimate find_theta_max(const FockState& state, int angles, const QuadratureBasis& basis,
                              double relative_floor = kRelativePeakFloor);
FringeEstimate find_theta_max(const FockState& state, int angles, const QuadratureGrid& grid,
                              double relative_floor = kRelativePeakFloor);

double choose_phase(const ControlStrategy& strategy, const FringeEstimate& estimate);

/// Per-trajectory controller: caches the Hermite-Gauss table and the last
/// chosen phase between updates.
class Controller {
 public:
  Controller(ControlStrategy strategy, Eigen::Index dim,
             double relative_floor = kRelativePeakFloor);

  double tick(const FockState& state, long step_index);

  double phase() const { return phase_; }
  const ControlStrategy& strategy() const { return strategy_; }
  const std::optional<FringeEstimate>& last_estimate() const { return last_; }

 private:
  ControlStrategy strategy_;
  double relative_floor_;
  std::optional<QuadratureBasis> basis_;
  Eigen::VectorXd thetas_;
  Eigen::MatrixXd pdfs_;
  QuadratureBasis::Workspace workspace_;
  double phase_ = 0.0;
  std::optional<FringeEstimate> last_;
};

}  // namespace qduff
