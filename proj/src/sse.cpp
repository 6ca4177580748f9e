#include "qduff/sse.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qduff {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

namespace {

constexpr cd kI{0.0, 1.0};

cd expect_a(const VectorXcd& x) {
  cd acc{0.0};
  for (Eigen::Index n = 0; n + 1 < x.size(); ++n) {
    acc += std::sqrt(double(n + 1)) * std::conj(x(n)) * x(n + 1);
  }
  return acc;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Ito ? "ito" : "stratonovich"; }

Scheme parse_scheme(std::string_view text) {
  if (text == "ito" || text == "ito-euler") return Scheme::Ito;
  if (text == "stratonovich" || text == "stratonovich-midpoint") return Scheme::Stratonovich;
  throw ConfigError("scheme: expected 'ito' or 'stratonovich', got '" + std::string(text) + "'");
}

double SimParams::homodyne_gain() const { return signal_gain.value_or(std::sqrt(Gamma)); }

double SimParams::drive_period() const { return 2.0 * std::numbers::pi / Omega; }

void SimParams::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(beta > 0.0)) fail("beta: must be > 0");
  if (!(Gamma >= 0.0)) fail("Gamma: must be >= 0");
  if (!(Omega > 0.0)) fail("Omega: must be > 0");
  if (!std::isfinite(g)) fail("g: must be finite");
  if (N < 16) fail("N: must be >= 16");
  if (!(dt > 0.0)) fail("dt: must be > 0");
  if (dt * Omega > 1e-2 * 2.0 * std::numbers::pi) fail("dt: dt*Omega must not exceed 0.02*pi");
  if (!(d0 > 0.0)) fail("d0: must be > 0");
}

NoiseStream::NoiseStream(std::uint64_t seed, double dt)
    : seed_(seed), dt_(dt), sqrt_dt_(std::sqrt(dt)), rng_(seed) {}

BandTables hamiltonian_band_coeffs(int N, const SimParams& p) {
  BandTables t;
  t.Gamma = p.Gamma;
  t.diag.resize(N);
  t.band2 = VectorXcd::Zero(std::max(N - 2, 0));
  t.band4 = Eigen::VectorXd::Zero(std::max(N - 4, 0));
  t.drive1.resize(std::max(N - 1, 0));
  t.damping.resize(N);
  t.lower1.resize(std::max(N - 1, 0));
  t.lower2.resize(std::max(N - 2, 0));

  // beta^2/4 Q^4 = beta^2/16 (a + a^dag)^4
  const double quartic = p.beta * p.beta / 16.0;
  const double drive = -p.g / (std::numbers::sqrt2 * p.beta);
  for (int n = 0; n < N; ++n) {
    const double dn = n;
    t.diag(n) = quartic * (6.0 * dn * dn + 6.0 * dn + 3.0);
    t.damping(n) = -p.Gamma * dn;
    if (n + 1 < N) {
      t.lower1(n) = std::sqrt(dn + 1.0);
      t.drive1(n) = drive * std::sqrt(dn + 1.0);
    }
    if (n + 2 < N) {
      const double s2 = std::sqrt((dn + 1.0) * (dn + 2.0));
      t.lower2(n) = s2;
      // quartic part, -(a^2 + a^dag^2)/2 from P^2/2 - Q^2/2, and
      // Gamma/2 (QP + PQ) = -i Gamma/2 (a^2 - a^dag^2)
      t.band2(n) = s2 * (cd(quartic * (4.0 * dn + 6.0), 0.0) - 0.5 * cd(1.0, p.Gamma));
    }
    if (n + 4 < N) {
      t.band4(n) = quartic * std::sqrt((dn + 1.0) * (dn + 2.0) * (dn + 3.0) * (dn + 4.0));
    }
  }
  return t;
}

void apply_hamiltonian(const BandTables& t, double drive_cos, const VectorXcd& x, VectorXcd& y) {
  const Eigen::Index N = x.size();
  y.resize(N);
  for (Eigen::Index n = 0; n < N; ++n) y(n) = t.diag(n) * x(n);
  for (Eigen::Index n = 0; n + 1 < N; ++n) {
    const double c = t.drive1(n) * drive_cos;
    y(n) += c * x(n + 1);
    y(n + 1) += c * x(n);
  }
  for (Eigen::Index n = 0; n + 2 < N; ++n) {
    y(n) += t.band2(n) * x(n + 2);
    y(n + 2) += std::conj(t.band2(n)) * x(n);
  }
  for (Eigen::Index n = 0; n + 4 < N; ++n) {
    y(n) += t.band4(n) * x(n + 4);
    y(n + 4) += t.band4(n) * x(n);
  }
}

double record_homodyne(const FockState& state, double phi, double dW, const SimParams& params) {
  const cd a = expect_annihilation(state);
  const double x_phi = std::numbers::sqrt2 * std::real(std::polar(1.0, -phi) * a);
  return params.homodyne_gain() * x_phi * params.dt + dW;
}

SseStepper::SseStepper(const SimParams& params)
    : params_(params), tables_(hamiltonian_band_coeffs(params.N, params)) {
  const Eigen::Index n = params.N;
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &work_}) v->resize(n);
}

void SseStepper::apply_a(const VectorXcd& x, VectorXcd& y) const {
  const Eigen::Index N = x.size();
  y.resize(N);
  for (Eigen::Index n = 0; n + 1 < N; ++n) y(n) = tables_.lower1(n) * x(n + 1);
  y(N - 1) = 0.0;
}

// -iH x - L^dag L/2 x + <L^dag> L x - |<L>|^2/2 x, with <a> held fixed.
void SseStepper::ito_drift(const VectorXcd& x, double t, cd mean_a, VectorXcd& out) {
  const double G = params_.Gamma;
  apply_hamiltonian(tables_, std::cos(params_.Omega * t), x, out);
  apply_a(x, work_);
  const cd feed = 2.0 * G * std::conj(mean_a);
  const double shift = G * std::norm(mean_a);
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    out(n) = -kI * out(n) + (tables_.damping(n) - shift) * x(n) + feed * work_(n);
  }
}

StepReport SseStepper::finish(FockState& state, double t) {
  StepReport rep;
  rep.pre_norm_squared = state.norm_squared();
  if (!std::isfinite(rep.pre_norm_squared)) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t;
    throw NumericalError(msg.str());
  }
  state.normalize();
  rep.tail = tail_weight(state);
  if (rep.tail >= kTailAbort) {
    std::ostringstream msg;
    msg << "truncation failure at t = " << t << ": tail weight " << rep.tail;
    throw TruncationError(msg.str(), rep.tail, t);
  }
  rep.tail_warning = rep.tail >= kTailWarn;
  return rep;
}

StepReport SseStepper::step(FockState& state, double phi, double dW, double t,
                            HomodyneRecord* record) {
  return params_.scheme == Scheme::Ito ? step_ito(state, phi, dW, t, record)
                                       : step_stratonovich(state, phi, dW, t, record);
}

StepReport SseStepper::step_ito(FockState& state, double phi, double dW, double t,
                                HomodyneRecord* record) {
  const double dt = params_.dt;
  VectorXcd& c = state.coeffs;
  const cd mean_a = expect_a(c);
  if (record != nullptr) {
    const double x_phi = std::numbers::sqrt2 * std::real(std::polar(1.0, -phi) * mean_a);
    record->dt = dt;
    record->increments.push_back(params_.homodyne_gain() * x_phi * dt + dW);
  }

  // Deterministic part: classical RK4 of the (frozen-<a>) linear drift.
  ito_drift(c, t, mean_a, k1_);
  tmp_ = c + 0.5 * dt * k1_;
  ito_drift(tmp_, t + 0.5 * dt, mean_a, k2_);
  tmp_ = c + 0.5 * dt * k2_;
  ito_drift(tmp_, t + 0.5 * dt, mean_a, k3_);
  tmp_ = c + dt * k3_;
  ito_drift(tmp_, t + dt, mean_a, k4_);

  // Euler-Maruyama noise increment (L - <L>) e^{-i phi} dW
  apply_a(c, work_);
  const cd kappa = std::sqrt(2.0 * params_.Gamma) * std::polar(1.0, -phi) * dW;
  c += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_) + kappa * (work_ - mean_a * c);
  return finish(state, t + dt);
}

// Stratonovich drift = Ito drift - (1/2) b'b, where b = kappa (a - <a>) psi,
// kappa = sqrt(2 Gamma) e^{-i phi}:
//   -Gamma e^{-2i phi} (a - <a>)^2 psi
//   + Gamma [e^{-2i phi} (<a^2> - <a>^2) + <n> - |<a>|^2] psi
void SseStepper::stratonovich_fields(const VectorXcd& x, double t, double phi, VectorXcd& drift,
                                     VectorXcd& noise) {
  const double G = params_.Gamma;
  const Eigen::Index N = x.size();
  const double nrm2 = x.squaredNorm();
  const cd mean_a = expect_a(x) / nrm2;
  apply_a(x, k3_);   // a x
  apply_a(k3_, k4_); // a^2 x
  const cd mean_a2 = x.dot(k4_) / nrm2;
  const double mean_n = k3_.squaredNorm() / nrm2;
  const cd rot = std::polar(1.0, -2.0 * phi);

  ito_drift(x, t, mean_a, drift);
  const cd scalar = G * (rot * (mean_a2 - mean_a * mean_a) + (mean_n - std::norm(mean_a)));
  const cd kappa = std::sqrt(2.0 * G) * std::polar(1.0, -phi);
  for (Eigen::Index n = 0; n < N; ++n) {
    // (a - <a>)^2 x = a^2 x - 2<a> a x + <a>^2 x
    const cd sq = k4_(n) - 2.0 * mean_a * k3_(n) + mean_a * mean_a * x(n);
    drift(n) += -G * rot * sq + scalar * x(n);
    noise(n) = kappa * (k3_(n) - mean_a * x(n));
  }
}

StepReport SseStepper::step_stratonovich(FockState& state, double phi, double dW, double t,
                                         HomodyneRecord* record) {
  const double dt = params_.dt;
  const double t_mid = t + 0.5 * dt;
  VectorXcd& c = state.coeffs;
  if (record != nullptr) {
    record->dt = dt;
    record->increments.push_back(record_homodyne(state, phi, dW, params_));
  }

  VectorXcd mid = c;
  VectorXcd next(c.size());
  bool converged = false;
  for (int it = 0; it < kMaxMidpointIterations; ++it) {
    stratonovich_fields(mid, t_mid, phi, k1_, k2_);
    next = c + 0.5 * (dt * k1_ + dW * k2_);
    const double change = (next - mid).cwiseAbs().maxCoeff();
    mid.swap(next);
    if (change < kMidpointTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "midpoint iteration did not converge in " << kMaxMidpointIterations
        << " iterations at t = " << t;
    throw NumericalError(msg.str());
  }
  c = 2.0 * mid - c;
  return finish(state, t + dt);
}

FockState sse_step_ito(const FockState& state, double phi, double dW, double t,
                       const SimParams& params) {
  SseStepper stepper(params);
  FockState out = state;
  stepper.step_ito(out, phi, dW, t);
  return out;
}

FockState sse_step_stratonovich(const FockState& state, double phi, double dW, double t,
                                const SimParams& params) {
  SseStepper stepper(params);
  FockState out = state;
  stepper.step_stratonovich(out, phi, dW, t);
  return out;
}

namespace {

MatrixXcd ladder(int dim) {
  MatrixXcd a = MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

struct DenseModel {
  MatrixXcd h0;
  MatrixXcd h1;  // multiplies cos(Omega t)
};

DenseModel dense_model(int N, const SimParams& p) {
  // Build on N + 4 levels so the truncated Q^4 equals the truncation of the
  // infinite-dimensional operator.
  const int big = N + 4;
  const MatrixXcd a = ladder(big);
  const MatrixXcd ad = a.adjoint();
  const MatrixXcd q = (a + ad) / std::numbers::sqrt2;
  const MatrixXcd pm = (a - ad) / (kI * std::numbers::sqrt2);
  const MatrixXcd q2 = q * q;
  const MatrixXcd h0 = 0.5 * pm * pm + (p.beta * p.beta / 4.0) * q2 * q2 - 0.5 * q2 +
                       (p.Gamma / 2.0) * (q * pm + pm * q);
  const MatrixXcd h1 = -(p.g / p.beta) * q;
  return {h0.topLeftCorner(N, N), h1.topLeftCorner(N, N)};
}

}  // namespace

MatrixXcd dense_hamiltonian(int N, const SimParams& params, double t) {
  const DenseModel m = dense_model(N, params);
  return m.h0 + std::cos(params.Omega * t) * m.h1;
}

MatrixXcd me_oracle_evolve(const MatrixXcd& rho0, double t_end, const SimParams& params,
                           const MasterEquationOptions& opts) {
  const int N = static_cast<int>(rho0.rows());
  if (rho0.cols() != N) throw ConfigError("me_oracle_evolve: rho0 must be square");
  if (N > 40) throw ConfigError("me_oracle_evolve: dense oracle limited to N <= 40");
  const double dt = opts.dt > 0.0 ? opts.dt : params.dt;
  const DenseModel model = dense_model(N, params);
  const MatrixXcd L = std::sqrt(2.0 * params.Gamma) * ladder(N);
  const MatrixXcd LdL = L.adjoint() * L;
  const cd trace0 = rho0.trace();

  auto rhs = [&](const MatrixXcd& rho, double t) -> MatrixXcd {
    MatrixXcd out = L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
    if (opts.include_hamiltonian) {
      const MatrixXcd h = model.h0 + std::cos(params.Omega * t) * model.h1;
      out += -kI * (h * rho - rho * h);
    }
    return out;
  };

  MatrixXcd rho = rho0;
  const long steps = std::lround((t_end - opts.t0) / dt);
  double t = opts.t0;
  for (long s = 0; s < steps; ++s) {
    const MatrixXcd k1 = rhs(rho, t);
    const MatrixXcd k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt);
    const MatrixXcd k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt);
    const MatrixXcd k4 = rhs(rho + dt * k3, t + dt);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    t += dt;
    if (std::abs(rho.trace() - trace0) > 1e-6) {
      std::ostringstream msg;
      msg << "master equation trace drift " << std::abs(rho.trace() - trace0) << " at t = " << t;
      throw NumericalError(msg.str());
    }
  }
  return rho;
}

}  // namespace qduff
