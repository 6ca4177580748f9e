#pragma once

// Conditional-state propagation for the homodyne-monitored Duffing
// oscillator:
//
//   H = P^2/2 + beta^2/4 Q^4 - Q^2/2 + Gamma/2 (QP + PQ) - (g/beta) Q cos(Omega t)
//   L = sqrt(2 Gamma) a,   d xi = e^{-i phi} dW
//
// plus a dense master-equation integrator used as an independent oracle.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qduff/fock.hpp"

namespace qduff {

enum class Scheme { Ito, Stratonovich };

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

struct SimParams {
  double beta = 0.3;
  double Gamma = 0.10;
  double g = 0.3;
  double Omega = 1.0;
  int N = 64;
  double dt = 1e-3;
  double d0 = 1e-3;
  Scheme scheme = Scheme::Ito;
  /// Prefactor of <X_phi> in the homodyne current; sqrt(Gamma) when unset.
  std::optional<double> signal_gain;

  double homodyne_gain() const;
  double drive_period() const;
  void validate() const;
};

/// Gaussian Wiener increments dW ~ N(0, dt), reproducible from a seed.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, double dt);

  double next() { return sqrt_dt_ * normal_(rng_); }
  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_; }

 private:
  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Banded Fock-basis coefficients. Only the upper bands are stored; H is
/// Hermitian so <n+k|H|n> = conj(<n|H|n+k>).
struct BandTables {
  Eigen::VectorXd diag;      ///< <n|H|n>
  Eigen::VectorXcd band2;    ///< <n|H|n+2>
  Eigen::VectorXd band4;     ///< <n|H|n+4>
  Eigen::VectorXd drive1;    ///< <n|H|n+1> per unit cos(Omega t)
  Eigen::VectorXd damping;   ///< -<n|L^dag L|n>/2 = -Gamma n
  Eigen::VectorXd lower1;    ///< <n|a|n+1> = sqrt(n+1)
  Eigen::VectorXd lower2;    ///< <n|a^2|n+2> = sqrt((n+1)(n+2))
  double Gamma = 0.0;
};

BandTables hamiltonian_band_coeffs(int N, const SimParams& params);

/// y = H(t) x with the drive factor cos(Omega t) supplied by the caller.
void apply_hamiltonian(const BandTables& tables, double drive_cos, const Eigen::VectorXcd& x,
                       Eigen::VectorXcd& y);

struct StepReport {
  double tail = 0.0;
  double pre_norm_squared = 1.0;
  bool tail_warning = false;
};

struct HomodyneRecord {
  double dt = 0.0;
  std::vector<double> increments;  ///< I dt per step
};

/// I dt = gain <X_phi> dt + dW. Diagnostic only.
double record_homodyne(const FockState& state, double phi, double dW, const SimParams& params);

/// Owns the band tables and scratch buffers for one trajectory.
class SseStepper {
 public:
  explicit SseStepper(const SimParams& params);

  StepReport step(FockState& state, double phi, double dW, double t,
                  HomodyneRecord* record = nullptr);
  StepReport step_ito(FockState& state, double phi, double dW, double t,
                      HomodyneRecord* record = nullptr);
  StepReport step_stratonovich(FockState& state, double phi, double dW, double t,
                               HomodyneRecord* record = nullptr);

  const SimParams& params() const { return params_; }
  const BandTables& tables() const { return tables_; }

  static constexpr int kMaxMidpointIterations = 10;
  /// max coefficient change; iterates stall near 1e-12 from round-off
  static constexpr double kMidpointTolerance = 1e-10;

 private:
  void ito_drift(const Eigen::VectorXcd& x, double t, std::complex<double> mean_a,
                 Eigen::VectorXcd& out);
  void stratonovich_fields(const Eigen::VectorXcd& x, double t, double phi, Eigen::VectorXcd& drift,
                           Eigen::VectorXcd& noise);
  void apply_a(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  StepReport finish(FockState& state, double t);

  SimParams params_;
  BandTables tables_;
  Eigen::VectorXcd k1_, k2_, k3_, k4_, tmp_, work_;
};

FockState sse_step_ito(const FockState& state, double phi, double dW, double t,
                       const SimParams& params);
FockState sse_step_stratonovich(const FockState& state, double phi, double dW, double t,
                                const SimParams& params);

struct MasterEquationOptions {
  bool include_hamiltonian = true;
  double dt = 0.0;  ///< 0 selects params.dt
  double t0 = 0.0;
};

/// Dense Hamiltonian H(t), built from products of ladder matrices on an
/// enlarged space and truncated; independent of BandTables.
Eigen::MatrixXcd dense_hamiltonian(int N, const SimParams& params, double t);

/// RK4 integration of the Lindblad equation with L = sqrt(2 Gamma) a.
Eigen::MatrixXcd me_oracle_evolve(const Eigen::MatrixXcd& rho0, double t_end,
                                  const SimParams& params, const MasterEquationOptions& opts = {});

}  // namespace qduff
