#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

#include "qduff/fock.hpp"

using namespace qduff;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

namespace {

FockState cat_state(double alpha, int N) {
  FockState a = coherent_state(cd(alpha, 0), N);
  FockState b = coherent_state(cd(-alpha, 0), N);
  FockState c(Eigen::VectorXcd(a.coeffs + b.coeffs));
  c.normalize();
  return c;
}

FockState random_state(int N, int support, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  FockState s(N);
  for (int k = 0; k < support; ++k) s.coeffs(k) = cd(n(rng), n(rng));
  s.normalize();
  return s;
}

// Dense exp(alpha a^dag - alpha* a) on a larger space, truncated afterwards.
Eigen::MatrixXcd dense_displacement(cd alpha, int N) {
  const int big = N + 60;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big, big);
  for (int n = 1; n < big; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp().topLeftCorner(N, N);
}

}  // namespace

TEST(CoherentState, VacuumAtZero) {
  const FockState s = coherent_state(cd(0, 0), 16);
  EXPECT_DOUBLE_EQ(s.coeffs(0).real(), 1.0);
  EXPECT_EQ(s.coeffs.tail(15).norm(), 0.0);
}

TEST(CoherentState, AnnihilationEigenvalue) {
  const FockState s = coherent_state(cd(1, 0), 64);
  EXPECT_NEAR(std::abs(expect_annihilation(s) - cd(1, 0)), 0.0, 1e-6);
}

TEST(CoherentState, CentroidOfImaginaryAmplitude) {
  const PhasePoint c = centroid(coherent_state(cd(0, 2), 64));
  EXPECT_NEAR(c.q, 0.0, 1e-9);
  EXPECT_NEAR(c.p, 2 * kSqrt2, 1e-9);
}

TEST(CoherentState, RejectsSmallBasisAndTruncation) {
  EXPECT_THROW(coherent_state(cd(0.1, 0), 7), ConfigError);
  try {
    coherent_state(cd(6, 0), 16);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.tail_weight(), 1e-4);
  }
}

TEST(ExpectAnnihilation, FockStatesAndSmallCoherent) {
  EXPECT_EQ(expect_annihilation(FockState::fock(16, 0)), cd(0, 0));
  EXPECT_EQ(expect_annihilation(FockState::fock(16, 1)), cd(0, 0));
  EXPECT_NEAR(std::abs(expect_annihilation(coherent_state(cd(0.5, 0), 64)) - 0.5), 0.0, 1e-12);
}

TEST(Centroid, Examples) {
  const PhasePoint v = centroid(FockState::fock(16, 0));
  EXPECT_EQ(v.q, 0.0);
  EXPECT_EQ(v.p, 0.0);
  const PhasePoint c = centroid(coherent_state(cd(1, 1), 64));
  EXPECT_NEAR(c.q, kSqrt2, 1e-10);
  EXPECT_NEAR(c.p, kSqrt2, 1e-10);
  const PhasePoint d = centroid(displace(FockState::fock(64, 0), cd(1, 0)));
  EXPECT_NEAR(d.q, kSqrt2, 1e-10);
  EXPECT_NEAR(d.p, 0.0, 1e-10);
}

TEST(Displace, VacuumGivesCoherentState) {
  for (cd alpha : {cd(2, 0), cd(0, -2), cd(1.2, 1.5), cd(-0.3, 0.7)}) {
    const FockState d = displace(FockState::fock(64, 0), alpha);
    const FockState c = coherent_state(alpha, 64);
    EXPECT_LT((d.coeffs - c.coeffs).cwiseAbs().maxCoeff(), 1e-8) << alpha;
  }
}

TEST(Displace, ZeroIsIdentity) {
  const FockState s = random_state(64, 20, 3);
  EXPECT_EQ((displace(s, cd(0, 0)).coeffs - s.coeffs).norm(), 0.0);
}

TEST(Displace, MatchesDenseMatrixExponential) {
  const int N = 64;
  for (cd alpha : {cd(0.1, 0), cd(0.03, -0.08), cd(-0.5, 0.4), cd(1.5, 0.5)}) {
    const Eigen::MatrixXcd closed = displacement_matrix(alpha, N);
    const Eigen::MatrixXcd dense = dense_displacement(alpha, N);
    EXPECT_LT((closed - dense).cwiseAbs().maxCoeff(), 1e-10) << alpha;
  }
}

TEST(Displace, NormPreservedForSmallShifts) {
  const FockState s = random_state(64, 30, 5);
  for (cd alpha : {cd(0.1, 0), cd(0, 0.1), cd(-0.07, 0.07)}) {
    const Eigen::VectorXcd raw = displacement_matrix(alpha, 64) * s.coeffs;
    EXPECT_NEAR(raw.squaredNorm(), 1.0, 1e-6);
    EXPECT_NEAR(displace(s, alpha).norm_squared(), 1.0, 1e-12);
  }
}

TEST(Displace, AbortsOnLargeTail) {
  EXPECT_THROW(displace(FockState::fock(16, 10), cd(3, 0)), TruncationError);
}

TEST(HermiteGauss, AnalyticValues) {
  const QuadratureGrid grid{-1.0, 1.0, 3};
  const Eigen::MatrixXd psi = quadrature_wavefunctions<double>(grid, 4);
  EXPECT_NEAR(psi(1, 0), 0.751126, 1e-6);
  EXPECT_NEAR(psi(1, 0), std::pow(kPi, -0.25), 1e-15);
  EXPECT_EQ(psi(1, 1), 0.0);
  // psi_1(x) = sqrt(2) x psi_0(x)
  EXPECT_NEAR(psi(2, 1), kSqrt2 * psi(2, 0), 1e-15);
}

TEST(HermiteGauss, OrthonormalOnFineGrid) {
  const int N = 64;
  const QuadratureGrid grid = QuadratureGrid::covering(N, 2048);
  const Eigen::MatrixXd psi = quadrature_wavefunctions<double>(grid, 40);
  const Eigen::MatrixXd gram = psi.transpose() * psi * grid.spacing();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(QuadraturePdf, VacuumIsGaussian) {
  const QuadratureGrid grid = QuadratureGrid::covering(32);
  const FockState vac = FockState::fock(32, 0);
  for (double theta : {0.0, 0.7, 2.0}) {
    const Eigen::VectorXd pdf = quadrature_pdf(vac, theta, grid);
    for (int j = 0; j < grid.count; j += 37) {
      const double x = grid.point(j);
      EXPECT_NEAR(pdf(j), std::exp(-x * x) / std::sqrt(kPi), 1e-12);
    }
  }
}

TEST(QuadraturePdf, CoherentPeakAtCentroid) {
  const QuadratureGrid grid = QuadratureGrid::covering(64);
  const Eigen::VectorXd pdf = quadrature_pdf(coherent_state(cd(2, 0), 64), 0.0, grid);
  Eigen::Index j;
  pdf.maxCoeff(&j);
  EXPECT_NEAR(grid.point(int(j)), 2 * kSqrt2, grid.spacing());
  EXPECT_NEAR(pdf.sum() * grid.spacing(), 1.0, 1e-4);
}

TEST(QuadraturePdf, NonSymmetricGridMatchesSymmetric) {
  const FockState s = random_state(32, 20, 9);
  const QuadratureGrid sym = QuadratureGrid::covering(32, 512);
  const QuadratureGrid odd{sym.x_min, sym.x_max, 511};
  const QuadratureGrid shifted{sym.x_min - 0.5, sym.x_max, 400};
  const QuadratureBasis b_sym(sym, 32);
  const QuadratureBasis b_odd(odd, 32);
  for (double theta : {0.0, 1.1}) {
    const Eigen::VectorXd p = b_sym.pdf(s, theta);
    // direct evaluation
    Eigen::VectorXcd phased(32);
    for (int n = 0; n < 32; ++n) phased(n) = s.coeffs(n) * std::polar(1.0, -n * theta);
    const Eigen::VectorXd direct =
        (quadrature_wavefunctions<double>(sym, 32).cast<cd>() * phased).cwiseAbs2();
    EXPECT_LT((p - direct).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd q = b_odd.pdf(s, theta);
    const Eigen::VectorXd direct_odd =
        (quadrature_wavefunctions<double>(odd, 32).cast<cd>() * phased).cwiseAbs2();
    EXPECT_LT((q - direct_odd).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(quadrature_pdf(s, theta, shifted).sum() * shifted.spacing(), 1.0, 1e-4);
  }
}

TEST(QuadraturePdf, CatFringesAcrossAndTwoPeaksAlong) {
  const FockState cat = cat_state(2.0, 64);
  const QuadratureGrid grid = QuadratureGrid::covering(64);
  auto maxima = [&](double theta) {
    const Eigen::VectorXd p = quadrature_pdf(cat, theta, grid);
    int count = 0;
    for (int j = 1; j + 1 < grid.count; ++j) {
      if (p(j) > p(j - 1) && p(j) > p(j + 1) && p(j) > 1e-10 * p.maxCoeff()) ++count;
    }
    return count;
  };
  EXPECT_EQ(maxima(0.0), 2);
  EXPECT_GT(maxima(kPi / 2), 3);
}

TEST(Wigner, VacuumGaussian) {
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(9, -2, 2);
  const Eigen::MatrixXd w = wigner(FockState::fock(16, 0), q, q);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      EXPECT_NEAR(w(i, j), std::exp(-(q(i) * q(i) + q(j) * q(j))) / kPi, 1e-12);
    }
  }
}

TEST(Wigner, CoherentStateIsShiftedGaussian) {
  const cd alpha(1.0, -0.5);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(21, -3, 3);
  const Eigen::MatrixXd w = wigner(coherent_state(alpha, 32), q, q);
  const double q0 = kSqrt2 * alpha.real();
  const double p0 = kSqrt2 * alpha.imag();
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double r2 = std::pow(q(i) - q0, 2) + std::pow(q(j) - p0, 2);
      EXPECT_NEAR(w(i, j), std::exp(-r2) / kPi, 1e-10);
    }
  }
}

TEST(Wigner, CatHasNegativeFringesAndUnitIntegral) {
  const FockState cat = cat_state(2.0, 40);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(161, -8, 8);
  const Eigen::MatrixXd w = wigner(cat, x, x);
  const double h = x(1) - x(0);
  EXPECT_NEAR(w.sum() * h * h, 1.0, 1e-3);
  EXPECT_LT(w.minCoeff(), -0.1);
  // lobes at Q = +/- 2 sqrt(2), P = 0, each of height 1/(2 pi)
  EXPECT_NEAR(w(80 + 28, 80), 0.5 / kPi, 0.01);
  EXPECT_NEAR(w(80 - 28, 80), 0.5 / kPi, 0.01);
}

TEST(Wigner, FockOneNegativeAtOrigin) {
  Eigen::VectorXd z(1);
  z << 0.0;
  EXPECT_NEAR(wigner(FockState::fock(8, 1), z, z)(0, 0), -1.0 / kPi, 1e-14);
}

TEST(TailWeight, Examples) {
  EXPECT_EQ(tail_weight(FockState::fock(64, 0)), 0.0);
  EXPECT_EQ(tail_weight(FockState::fock(64, 63)), 1.0);
  // Poisson tail for |alpha|^2 = 4 beyond n = 60 is below 1e-40
  EXPECT_LT(tail_weight(coherent_state(cd(2, 0), 64)), 1e-10);
}

TEST(Rotate, ShiftsQuadratureAngle) {
  const FockState s = random_state(32, 16, 11);
  const QuadratureGrid grid = QuadratureGrid::covering(32, 256);
  const double chi = 0.37;
  const FockState r = rotate(s, chi);
  for (double theta : {0.0, 0.5, 2.9}) {
    const Eigen::VectorXd a = quadrature_pdf(r, theta, grid);
    const Eigen::VectorXd b = quadrature_pdf(s, theta + chi, grid);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}
