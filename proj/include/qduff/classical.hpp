#pragma once

// Classical driven-damped Duffing baseline:
//   x'' + 2 Gamma x' + beta^2 x^3 - x = (g / beta) cos(Omega t)

#include <functional>
#include <vector>

namespace qduff {

struct ClassicalState {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

struct ClassicalParams {
  double Gamma = 0.10;
  double g = 0.3;
  double Omega = 1.0;
  double beta = 0.3;

  double drive_period() const;
  void validate() const;
};

struct ClassicalDerivative {
  double dx;
  double dv;
};

ClassicalDerivative classical_rhs(const ClassicalState& s, const ClassicalParams& p);

/// One fixed RK4 step.
ClassicalState rk4_step(const ClassicalState& s, const ClassicalParams& p, double dt);

/// Default step: 1e-3 of a drive period.
double default_classical_dt(const ClassicalParams& p);

using ClassicalTrajectory = std::vector<ClassicalState>;

/// Fixed-step RK4 samples at every step, including the initial state.
ClassicalTrajectory integrate_classical(const ClassicalState& s0, const ClassicalParams& p,
                                        double t_end, double dt);

/// Streaming variant: observer(state) after every step; no storage.
ClassicalState integrate_classical(const ClassicalState& s0, const ClassicalParams& p, double t_end,
                                   double dt, const std::function<void(const ClassicalState&)>& observer);

struct PoincarePoint {
  double X;  ///< beta x
  double P;  ///< beta v
};

/// Strobes a stored trajectory at t = 2 pi k / Omega for
/// k = transient_periods + 1 ... floor(t_end Omega / 2 pi), in the rescaled
/// coordinates (beta x, beta v).
std::vector<PoincarePoint> poincare_section(const ClassicalTrajectory& traj, const ClassicalParams& p,
                                            long transient_periods = 200);

/// Integrates and strobes without storing the trajectory; the step is
/// one drive period / steps_per_period.
std::vector<PoincarePoint> poincare_section(const ClassicalState& s0, const ClassicalParams& p,
                                            long periods, long transient_periods = 200,
                                            long steps_per_period = 1000);

struct ClassicalLyapunovOptions {
  double d0 = 1e-8;
  double reset_period = 0.0;     ///< 0 selects one drive period
  double dt = 0.0;               ///< 0 selects default_classical_dt
  long transient_periods = 200;
  ClassicalState start{};        ///< x = 0 is replaced by the well minimum 1/beta
};

/// Twin-trajectory (Benettin) largest exponent. Separations are measured in
/// the rescaled coordinates (beta x, beta v), so the estimate is
/// independent of beta.
double classical_lyapunov(const ClassicalParams& p, double t_end,
                          const ClassicalLyapunovOptions& opts = {});

}  // namespace qduff
