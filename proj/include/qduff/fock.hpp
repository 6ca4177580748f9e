#pragma once

// Truncated Fock-space primitives for a single bosonic mode.
//
// Conventions: a = (Q + iP)/sqrt(2), so a coherent state |alpha> has its
// centroid at (Q, P) = sqrt(2) * (Re alpha, Im alpha). The quadrature
// X_theta = (e^{-i theta} a + e^{i theta} a^dag)/sqrt(2) has wavefunction
// <x|X_theta-eigenbasis|psi> = sum_n C_n psi_n(x) e^{-i n theta}.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "qduff/errors.hpp"

namespace qduff {

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Tail weight above which a state is considered outside the valid
/// truncation regime (warning level).
inline constexpr double kTailWarn = 1e-4;
/// Tail weight above which propagation is aborted.
inline constexpr double kTailAbort = 1e-2;

/// Conditional pure state |psi> = sum_{n<N} C_n |n>.
template <typename Real>
struct BasicFockState {
  CVector<Real> coeffs;

  BasicFockState() = default;
  explicit BasicFockState(Eigen::Index dim) : coeffs(CVector<Real>::Zero(dim)) {}
  explicit BasicFockState(CVector<Real> c) : coeffs(std::move(c)) {}

  static BasicFockState fock(Eigen::Index dim, Eigen::Index n) {
    BasicFockState s(dim);
    s.coeffs(n) = Real(1);
    return s;
  }

  Eigen::Index dim() const { return coeffs.size(); }
  Real norm_squared() const { return coeffs.squaredNorm(); }

  void normalize() {
    const Real nrm = coeffs.norm();
    if (!(nrm > Real(0)) || !std::isfinite(nrm)) {
      throw NumericalError("cannot normalize a zero or non-finite state");
    }
    coeffs /= nrm;
  }
};

using FockState = BasicFockState<double>;

template <typename Real>
struct BasicPhasePoint {
  Real q{0};
  Real p{0};
};
using PhasePoint = BasicPhasePoint<double>;

/// Equally spaced sample points on [x_min, x_max].
struct QuadratureGrid {
  double x_min{-1.0};
  double x_max{1.0};
  int count{3};

  double spacing() const { return (x_max - x_min) / (count - 1); }
  double point(int j) const { return x_min + j * spacing(); }

  void validate() const {
    if (!(x_min < x_max) || count < 3) {
      throw ConfigError("quadrature grid needs x_min < x_max and count >= 3");
    }
  }

  /// Grid spanning +/-(sqrt(2N) + margin), which covers the classical
  /// turning points of the highest retained Fock state.
  static QuadratureGrid covering(Eigen::Index dim, int count = 1024, double margin = 5.0) {
    const double half = std::sqrt(2.0 * static_cast<double>(dim)) + margin;
    return {-half, half, count};
  }
};

template <typename Real>
Real tail_weight(const BasicFockState<Real>& s) {
  const Eigen::Index n = s.dim();
  const Eigen::Index k = std::min<Eigen::Index>(4, n);
  return s.coeffs.tail(k).squaredNorm();
}

/// <a> = sum_{n=0}^{N-2} sqrt(n+1) C_n^* C_{n+1}.
template <typename Real>
std::complex<Real> expect_annihilation(const BasicFockState<Real>& s) {
  std::complex<Real> acc{0};
  const auto& c = s.coeffs;
  for (Eigen::Index n = 0; n + 1 < c.size(); ++n) {
    acc += std::sqrt(Real(n + 1)) * std::conj(c(n)) * c(n + 1);
  }
  return acc;
}

template <typename Real>
BasicPhasePoint<Real> centroid(const BasicFockState<Real>& s) {
  const auto a = expect_annihilation(s);
  return {std::numbers::sqrt2_v<Real> * a.real(), std::numbers::sqrt2_v<Real> * a.imag()};
}

/// C_n -> C_n e^{-i n chi}; maps the quadrature pdf at theta to theta + chi.
template <typename Real>
BasicFockState<Real> rotate(const BasicFockState<Real>& s, Real chi) {
  BasicFockState<Real> out = s;
  for (Eigen::Index n = 0; n < s.dim(); ++n) {
    out.coeffs(n) *= std::polar(Real(1), -chi * Real(n));
  }
  return out;
}

template <typename Real>
BasicFockState<Real> coherent_state(std::complex<Real> alpha, Eigen::Index dim) {
  if (dim < 8) throw ConfigError("coherent_state requires N >= 8");
  BasicFockState<Real> s(dim);
  s.coeffs(0) = std::exp(-std::norm(alpha) / Real(2));
  for (Eigen::Index n = 1; n < dim; ++n) {
    s.coeffs(n) = s.coeffs(n - 1) * alpha / std::sqrt(Real(n));
  }
  // weight that falls beyond the basis counts as tail as well
  const Real missing = std::max(Real(0), Real(1) - s.norm_squared());
  const Real tail = tail_weight(s) + missing;
  if (tail >= Real(kTailWarn)) {
    std::ostringstream msg;
    msg << "coherent state with |alpha|^2 = " << std::norm(alpha) << " does not fit in N = " << dim
        << " (tail weight " << tail << ")";
    throw TruncationError(msg.str(), static_cast<double>(tail));
  }
  s.normalize();
  return s;
}

/// Truncated displacement matrix <m|D(alpha)|n>, m,n < N, from the closed
/// form in terms of associated Laguerre polynomials.
template <typename Real>
CMatrix<Real> displacement_matrix(std::complex<Real> alpha, Eigen::Index dim) {
  using C = std::complex<Real>;
  CMatrix<Real> d = CMatrix<Real>::Zero(dim, dim);
  const Real x = std::norm(alpha);
  if (x == Real(0)) {
    d.setIdentity();
    return d;
  }
  const Real log_abs = std::log(std::abs(alpha));
  const C unit = alpha / std::abs(alpha);
  const C unit_neg = -std::conj(unit);

  RVector<Real> lgam(dim);
  for (Eigen::Index n = 0; n < dim; ++n) lgam(n) = std::lgamma(Real(n + 1));

  // For a fixed order k fill L_j^{(k)}(x) for j = 0..dim-1-k, then both the
  // k-th sub-diagonal (m = n + k) and super-diagonal (n = m + k).
  RVector<Real> lag(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Eigen::Index len = dim - k;
    lag(0) = Real(1);
    if (len > 1) lag(1) = Real(1 + k) - x;
    for (Eigen::Index j = 1; j + 1 < len; ++j) {
      lag(j + 1) = ((Real(2 * j + 1 + k) - x) * lag(j) - Real(j + k) * lag(j - 1)) / Real(j + 1);
    }
    const C phase_lo = std::pow(unit, Real(k));
    const C phase_hi = std::pow(unit_neg, Real(k));
    for (Eigen::Index j = 0; j < len; ++j) {
      const Real mag =
          std::exp(Real(0.5) * (lgam(j) - lgam(j + k)) + Real(k) * log_abs - x / Real(2)) * lag(j);
      d(j + k, j) = mag * phase_lo;
      if (k > 0) d(j, j + k) = mag * phase_hi;
    }
  }
  return d;
}

template <typename Real>
BasicFockState<Real> displace(const BasicFockState<Real>& s, std::complex<Real> alpha) {
  if (alpha == std::complex<Real>(0)) return s;
  BasicFockState<Real> out(displacement_matrix(alpha, s.dim()) * s.coeffs);
  const Real before = out.norm_squared();
  out.normalize();
  const Real tail = tail_weight(out) + std::max(Real(0), s.norm_squared() - before);
  if (tail >= Real(kTailAbort)) {
    std::ostringstream msg;
    msg << "displacement by |alpha| = " << std::abs(alpha) << " leaves tail weight " << tail;
    throw TruncationError(msg.str(), static_cast<double>(tail));
  }
  return out;
}

/// Normalized Hermite-Gauss functions psi_n(x_j); rows index grid points.
template <typename Real>
RMatrix<Real> quadrature_wavefunctions(const QuadratureGrid& grid, Eigen::Index dim) {
  grid.validate();
  RMatrix<Real> psi(grid.count, dim);
  const Real norm0 = Real(1) / std::sqrt(std::sqrt(std::numbers::pi_v<Real>));
  for (int j = 0; j < grid.count; ++j) {
    const Real x = static_cast<Real>(grid.point(j));
    Real prev2 = norm0 * std::exp(-x * x / Real(2));
    psi(j, 0) = prev2;
    if (dim == 1) continue;
    Real prev1 = std::numbers::sqrt2_v<Real> * x * prev2;
    psi(j, 1) = prev1;
    for (Eigen::Index n = 2; n < dim; ++n) {
      const Real cur =
          x * std::sqrt(Real(2) / Real(n)) * prev1 - std::sqrt(Real(n - 1) / Real(n)) * prev2;
      psi(j, n) = cur;
      prev2 = prev1;
      prev1 = cur;
    }
  }
  return psi;
}

/// Cached Hermite-Gauss table for repeated quadrature projections of states
/// with a fixed basis dimension.
template <typename Real>
class BasicQuadratureBasis {
 public:
  BasicQuadratureBasis(const QuadratureGrid& grid, Eigen::Index dim)
      : grid_(grid), psi_(quadrature_wavefunctions<Real>(grid, dim)) {
    // psi_n(-x) = (-1)^n psi_n(x): on a symmetric grid with an even number
    // of points only the positive half is needed, split by parity.
    symmetric_ = grid.count % 2 == 0 && grid.x_min == -grid.x_max;
    if (symmetric_) {
      const Eigen::Index half = grid.count / 2;
      even_.resize(half, (dim + 1) / 2);
      odd_.resize(half, dim / 2);
      for (Eigen::Index n = 0; n < dim; ++n) {
        auto col = psi_.col(n).tail(half);
        if (n % 2 == 0) {
          even_.col(n / 2) = col;
        } else {
          odd_.col(n / 2) = col;
        }
      }
    }
  }

  const QuadratureGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return psi_.cols(); }
  const RMatrix<Real>& table() const { return psi_; }

  RVector<Real> pdf(const BasicFockState<Real>& s, Real theta) const {
    RVector<Real> thetas(1);
    thetas(0) = theta;
    return pdfs(s, thetas).col(0);
  }

  /// Reusable buffers for repeated pdfs() calls. Keeping them alive avoids
  /// page-sized allocations on every controller update.
  struct Workspace {
    RMatrix<Real> rhs_even, rhs_odd, ev, od;
  };

  /// One pdf column per angle, evaluated with dense matrix products.
  RMatrix<Real> pdfs(const BasicFockState<Real>& s, const RVector<Real>& thetas) const {
    RMatrix<Real> out;
    Workspace ws;
    pdfs(s, thetas, out, ws);
    return out;
  }

  void pdfs(const BasicFockState<Real>& s, const RVector<Real>& thetas, RMatrix<Real>& out,
            Workspace& ws) const {
    check(s);
    const Eigen::Index m = thetas.size();
    // highest basis state that carries any weight
    Eigen::Index used = dim();
    while (used > 1 && std::norm(s.coeffs(used - 1)) < Real(1e-40)) --used;

    // columns [Re | Im] of C_n e^{-i n theta_k}; for the symmetric grid the
    // rows are split into even and odd n
    const Eigen::Index n_even = symmetric_ ? (used + 1) / 2 : used;
    const Eigen::Index n_odd = symmetric_ ? used / 2 : 0;
    RMatrix<Real>& rhs_even = ws.rhs_even;
    RMatrix<Real>& rhs_odd = ws.rhs_odd;
    rhs_even.resize(n_even, 2 * m);
    rhs_odd.resize(n_odd, 2 * m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::complex<Real> step = std::polar(Real(1), -thetas(k));
      std::complex<Real> phase(1);
      for (Eigen::Index n = 0; n < used; ++n) {
        const std::complex<Real> c = s.coeffs(n) * phase;
        const bool odd = symmetric_ && (n % 2 == 1);
        RMatrix<Real>& dst = odd ? rhs_odd : rhs_even;
        const Eigen::Index row = symmetric_ ? n / 2 : n;
        dst(row, k) = c.real();
        dst(row, m + k) = c.imag();
        phase *= step;
      }
    }

    out.resize(grid_.count, m);
    if (!symmetric_) {
      ws.ev.resize(grid_.count, 2 * m);
      ws.ev.noalias() = psi_.leftCols(used) * rhs_even;
      out = ws.ev.leftCols(m).cwiseAbs2() + ws.ev.rightCols(m).cwiseAbs2();
      return;
    }

    const Eigen::Index half = grid_.count / 2;
    ws.ev.resize(half, 2 * m);
    ws.ev.noalias() = even_.leftCols(n_even) * rhs_even;
    ws.od.resize(half, 2 * m);
    if (n_odd > 0) {
      ws.od.noalias() = odd_.leftCols(n_odd) * rhs_odd;
    } else {
      ws.od.setZero();
    }
    const auto& ev = ws.ev;
    const auto& od = ws.od;
    // amplitude at +x is even + odd, at -x even - odd
    out.bottomRows(half) = (ev.leftCols(m) + od.leftCols(m)).array().square() +
                           (ev.rightCols(m) + od.rightCols(m)).array().square();
    out.topRows(half) = ((ev.leftCols(m) - od.leftCols(m)).array().square() +
                         (ev.rightCols(m) - od.rightCols(m)).array().square())
                            .matrix()
                            .colwise()
                            .reverse();
  }

 private:
  void check(const BasicFockState<Real>& s) const {
    if (s.dim() != dim()) throw ConfigError("state dimension does not match quadrature basis");
  }

  QuadratureGrid grid_;
  RMatrix<Real> psi_;
  bool symmetric_ = false;
  RMatrix<Real> even_;
  RMatrix<Real> odd_;
};

using QuadratureBasis = BasicQuadratureBasis<double>;

/// P(x_j) = |sum_n C_n psi_n(x_j) e^{-i n theta}|^2.
template <typename Real>
RVector<Real> quadrature_pdf(const BasicFockState<Real>& s, Real theta, const QuadratureGrid& grid) {
  return BasicQuadratureBasis<Real>(grid, s.dim()).pdf(s, theta);
}

template <typename Real>
CMatrix<Real> density_matrix(const BasicFockState<Real>& s) {
  return s.coeffs * s.coeffs.adjoint();
}

/// Wigner function W(q_i, p_j) of a density matrix; W of the vacuum is
/// exp(-(q^2 + p^2))/pi. Rows index q, columns index p.
template <typename Real>
RMatrix<Real> wigner(const CMatrix<Real>& rho, const RVector<Real>& q_grid,
                     const RVector<Real>& p_grid) {
  using C = std::complex<Real>;
  const Eigen::Index dim = rho.rows();
  if (rho.cols() != dim) throw ConfigError("wigner: density matrix must be square");
  RMatrix<Real> w(q_grid.size(), p_grid.size());
  RVector<Real> sq(dim);
  for (Eigen::Index n = 0; n < dim; ++n) sq(n) = std::sqrt(Real(n));
  std::vector<C> col(static_cast<size_t>(dim));

  // Iterative construction of the |m><n| Wigner functions (Laguerre
  // recurrence in disguise), one phase-space point at a time.
  for (Eigen::Index i = 0; i < q_grid.size(); ++i) {
    for (Eigen::Index j = 0; j < p_grid.size(); ++j) {
      const C a = C(q_grid(i), p_grid(j)) / std::numbers::sqrt2_v<Real>;
      col[0] = std::exp(Real(-2) * std::norm(a)) / std::numbers::pi_v<Real>;
      Real acc = std::real(rho(0, 0)) * std::real(col[0]);
      for (Eigen::Index n = 1; n < dim; ++n) {
        col[n] = Real(2) * a * col[n - 1] / sq(n);
        acc += Real(2) * std::real(rho(0, n) * col[n]);
      }
      for (Eigen::Index m = 1; m < dim; ++m) {
        C temp = col[m];
        col[m] = (Real(2) * std::conj(a) * temp - sq(m) * col[m - 1]) / sq(m);
        acc += std::real(rho(m, m) * col[m]);
        for (Eigen::Index n = m + 1; n < dim; ++n) {
          const C next = (Real(2) * a * col[n - 1] - sq(m) * temp) / sq(n);
          temp = col[n];
          col[n] = next;
          acc += Real(2) * std::real(rho(m, n) * col[n]);
        }
      }
      w(i, j) = acc;
    }
  }
  return w;
}

template <typename Real>
RMatrix<Real> wigner(const BasicFockState<Real>& s, const RVector<Real>& q_grid,
                     const RVector<Real>& p_grid) {
  return wigner<Real>(density_matrix(s), q_grid, p_grid);
}

}  // namespace qduff
