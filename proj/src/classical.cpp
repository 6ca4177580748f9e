#include "qduff/classical.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qduff/errors.hpp"

namespace qduff {

double ClassicalParams::drive_period() const { return 2.0 * std::numbers::pi / Omega; }

void ClassicalParams::validate() const {
  if (!(beta > 0.0)) throw ConfigError("beta: must be > 0");
  if (!(Gamma >= 0.0)) throw ConfigError("Gamma: must be >= 0");
  if (!(g >= 0.0)) throw ConfigError("g: must be >= 0");
  if (!(Omega > 0.0)) throw ConfigError("Omega: must be > 0");
}

ClassicalDerivative classical_rhs(const ClassicalState& s, const ClassicalParams& p) {
  return {s.v, -2.0 * p.Gamma * s.v - p.beta * p.beta * s.x * s.x * s.x + s.x +
                   (p.g / p.beta) * std::cos(p.Omega * s.t)};
}

ClassicalState rk4_step(const ClassicalState& s, const ClassicalParams& p, double dt) {
  const auto k1 = classical_rhs(s, p);
  const auto k2 = classical_rhs({s.x + 0.5 * dt * k1.dx, s.v + 0.5 * dt * k1.dv, s.t + 0.5 * dt}, p);
  const auto k3 = classical_rhs({s.x + 0.5 * dt * k2.dx, s.v + 0.5 * dt * k2.dv, s.t + 0.5 * dt}, p);
  const auto k4 = classical_rhs({s.x + dt * k3.dx, s.v + dt * k3.dv, s.t + dt}, p);
  return {s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
          s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv), s.t + dt};
}

double default_classical_dt(const ClassicalParams& p) { return 1e-3 * p.drive_period(); }

namespace {

void check_finite(const ClassicalState& s) {
  if (!std::isfinite(s.x) || !std::isfinite(s.v)) {
    std::ostringstream msg;
    msg << "classical integration produced a non-finite state at t = " << s.t;
    throw NumericalError(msg.str());
  }
}

}  // namespace

ClassicalState integrate_classical(const ClassicalState& s0, const ClassicalParams& p, double t_end,
                                   double dt,
                                   const std::function<void(const ClassicalState&)>& observer) {
  p.validate();
  if (!(dt > 0.0)) throw ConfigError("dt: must be > 0");
  if (dt > 1e-2 * p.drive_period()) throw ConfigError("dt: must not exceed 1e-2 drive periods");
  const long steps = std::lround((t_end - s0.t) / dt);
  ClassicalState s = s0;
  for (long k = 0; k < steps; ++k) {
    s = rk4_step(s, p, dt);
    // re-anchor time to avoid accumulated rounding in t
    s.t = s0.t + (k + 1) * dt;
    check_finite(s);
    if (observer) observer(s);
  }
  return s;
}

ClassicalTrajectory integrate_classical(const ClassicalState& s0, const ClassicalParams& p,
                                        double t_end, double dt) {
  ClassicalTrajectory traj{s0};
  integrate_classical(s0, p, t_end, dt, [&](const ClassicalState& s) { traj.push_back(s); });
  return traj;
}

std::vector<PoincarePoint> poincare_section(const ClassicalTrajectory& traj, const ClassicalParams& p,
                                            long transient_periods) {
  std::vector<PoincarePoint> out;
  if (traj.size() < 2) return out;
  const double period = p.drive_period();
  const double dt = traj[1].t - traj[0].t;
  const long k_last = static_cast<long>(std::floor(traj.back().t / period + 1e-9));
  for (long k = transient_periods + 1; k <= k_last; ++k) {
    const double target = k * period;
    const long idx = std::lround((target - traj.front().t) / dt);
    if (idx < 0 || idx >= static_cast<long>(traj.size())) continue;
    out.push_back({p.beta * traj[idx].x, p.beta * traj[idx].v});
  }
  return out;
}

std::vector<PoincarePoint> poincare_section(const ClassicalState& s0, const ClassicalParams& p,
                                            long periods, long transient_periods,
                                            long steps_per_period) {
  const double dt = p.drive_period() / steps_per_period;
  std::vector<PoincarePoint> out;
  long step = 0;
  integrate_classical(s0, p, s0.t + periods * p.drive_period(), dt, [&](const ClassicalState& s) {
    ++step;
    if (step % steps_per_period == 0 && step / steps_per_period > transient_periods) {
      out.push_back({p.beta * s.x, p.beta * s.v});
    }
  });
  return out;
}

double classical_lyapunov(const ClassicalParams& p, double t_end, const ClassicalLyapunovOptions& o) {
  p.validate();
  const double dt = o.dt > 0.0 ? o.dt : default_classical_dt(p);
  const double reset = o.reset_period > 0.0 ? o.reset_period : p.drive_period();
  const long steps_per_window = std::max(1L, std::lround(reset / dt));
  const long windows = std::lround(t_end / dt) / steps_per_window;
  const long transient_windows =
      std::lround(o.transient_periods * p.drive_period() / (steps_per_window * dt));

  ClassicalState a = o.start;
  if (a.x == 0.0 && a.v == 0.0) a.x = 1.0 / p.beta;
  // separation measured in (beta x, beta v)
  ClassicalState b{a.x + o.d0 / p.beta, a.v, a.t};

  double log_sum = 0.0;
  double elapsed = 0.0;
  for (long w = 0; w < windows; ++w) {
    for (long k = 0; k < steps_per_window; ++k) {
      a = rk4_step(a, p, dt);
      b = rk4_step(b, p, dt);
    }
    check_finite(a);
    check_finite(b);
    const double dx = p.beta * (b.x - a.x);
    const double dv = p.beta * (b.v - a.v);
    const double d = std::hypot(dx, dv);
    if (!(d > 0.0)) throw NumericalError("classical twins collapsed (d = 0)");
    if (w >= transient_windows) {
      log_sum += std::log(d / o.d0);
      elapsed += steps_per_window * dt;
    }
    b.x = a.x + (o.d0 / d) * dx / p.beta;
    b.v = a.v + (o.d0 / d) * dv / p.beta;
  }
  if (!(elapsed > 0.0)) throw ConfigError("t_end is too short for the transient");
  return log_sum / elapsed;
}

}  // namespace qduff
