#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "flb/monodromy.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flb;

namespace {

Complex scalar(const Matrix& x) {
  return x(0, 0);
}

Complex random_z(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  return {u(rng), u(rng)};
}

}  // namespace

TEST(FundamentalSolutions, InitialData) {
  const auto J = random_operator(4, 2, 3, 0.5);
  const auto f = fundamental_solutions(J, Complex(0.3, 0.1));
  ASSERT_EQ(f.theta.size(), 6u);
  EXPECT_EQ(f.theta[0], identity(2));
  EXPECT_EQ(f.theta[1], zeros(2));
  EXPECT_EQ(f.phi[0], zeros(2));
  EXPECT_EQ(f.phi[1], identity(2));
}

TEST(FundamentalSolutions, FreeScalarExamples) {
  const Complex z(0.7, -0.2);
  auto f = fundamental_solutions(free_operator(1, 1), z);
  EXPECT_NEAR(std::abs(scalar(f.theta[2]) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(scalar(f.phi[2]) - z), 0.0, 1e-15);

  f = fundamental_solutions(free_operator(2, 1), z);
  EXPECT_NEAR(std::abs(scalar(f.phi[3]) - (z * z - 1.0)), 0.0, 1e-14);
}

TEST(FundamentalSolutions, RecursionResidual) {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto J = random_operator(1 + seed % 6, 1 + seed % 3, seed, 0.6);
    const Complex z = random_z(rng, 3.0);
    const auto f = fundamental_solutions(J, z);
    const std::size_t p = J.p;
    for (std::size_t n = 1; n <= p; ++n) {
      const Matrix& a_prev = J.a[(n + p - 2) % p];
      for (const auto* y : {&f.theta, &f.phi}) {
        const Matrix lhs = J.a[n - 1] * (*y)[n + 1] + J.b[n - 1] * (*y)[n] + a_prev * (*y)[n - 1];
        const Matrix rhs = z * (*y)[n];
        EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
      }
    }
  }
}

TEST(Monodromy, FreeScalarMatrix) {
  const Complex z(1.3, 0.4);
  const Matrix M = monodromy_matrix(free_operator(1, 1), z).M;
  EXPECT_NEAR(std::abs(M(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(M(0, 1) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(M(1, 0) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(M(1, 1) - z), 0.0, 1e-15);
}

TEST(Monodromy, FreeScalarMultipliersAtZero) {
  const auto mult = monodromy_matrix(free_operator(1, 1), 0.0).multipliers.values;
  const std::vector<Complex> want{{0, 1}, {0, -1}};
  EXPECT_LE(match_multisets(mult, want).max_deviation, 1e-14);
}

TEST(Monodromy, AgreesWithTransferProduct) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto J = random_operator(1 + seed % 6, 1 + seed % 3, seed, 0.6);
    const Complex z = random_z(rng, 3.0);
    const Matrix M = monodromy_matrix(J, z).M;
    const Matrix T = oracle::monodromy_by_transfer(J, z);
    EXPECT_LE((M - T).norm(), 1e-10 * std::max(1.0, T.norm()));
  }
}

TEST(Monodromy, UnitDeterminant) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3, 3);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto J = random_operator(1 + seed % 6, 1 + seed % 3, seed + 50, 0.2);
    for (int k = 0; k < 20; ++k) {
      const Complex z = k % 2 == 0 ? Complex(u(rng), 0.0) : random_z(rng, 1.5);
      const auto mm = monodromy_matrix(J, z);
      EXPECT_LE(std::abs(det(mm.M) - 1.0), 1e-9);
      Complex prod = 1.0;
      for (const Complex& t : mm.multipliers.values) prod *= t;
      EXPECT_LE(std::abs(prod - 1.0), 1e-9);
    }
  }
}

TEST(Monodromy, UnitDeterminantScalesWithConditioning) {
  // Rounding in M of size eps·‖M‖ moves det M by about eps·‖M‖², since the
  // singular values of M pair up as σ, 1/σ.
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-3, 3);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto J = random_operator(1 + seed % 6, 1 + seed % 3, seed + 70, 0.7);
    for (int k = 0; k < 10; ++k) {
      const Matrix M = monodromy_matrix(J, u(rng)).M;
      const double scale = std::numeric_limits<double>::epsilon() * M.squaredNorm();
      EXPECT_LE(std::abs(det(M) - 1.0), std::max(1e-12, 100.0 * scale));
    }
  }
}

TEST(CharDet, FreeScalarClosedForm) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Complex z = random_z(rng, 3.0);
    Complex tau = random_z(rng, 2.0);
    if (std::abs(tau) < 0.1) tau += 0.5;
    const Complex want = tau * tau - tau * z + 1.0;
    EXPECT_LE(std::abs(char_det(free_operator(1, 1), z, tau) - want), 1e-13 * std::max(1.0, std::abs(want)));
    // Floquet side: (−τ)(z − τ − 1/τ) expands to the same polynomial.
    EXPECT_LE(std::abs(-tau * (z - tau - 1.0 / tau) - want), 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST(CharDet, VanishesAtMultipliers) {
  const auto J = random_operator(3, 2, 11, 0.5);
  const Complex z(0.4, 0.2);
  for (const Complex& t : monodromy_matrix(J, z).multipliers.values) {
    EXPECT_LE(std::abs(char_det(J, z, t)), 1e-8);
  }
  EXPECT_FLB_ERROR(char_det(J, z, 0.0), ErrorCode::ZeroTau);
}

TEST(CharDet, MultiplierProduct) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto J = random_operator(1 + seed % 5, 1 + seed % 3, seed, 0.6);
    const Complex z = random_z(rng, 3.0);
    const Complex tau = std::polar(std::uniform_real_distribution<double>(0.5, 2.0)(rng), 0.3 * static_cast<double>(seed));
    EXPECT_LE(verify_multiplier_product(J, z, tau), 1e-8);
  }
}

TEST(DetIdentity, CouplingEnterAsReciprocal) {
  // With a = (2, 1/2·…) the coupling constant differs from 1, so the factor is visible.
  BlockJacobiOperator J = free_operator(2, 1);
  J.a[0](0, 0) = 1.2;
  J.a[1](0, 0) = 0.4;
  const Complex z(0.3, 0.0);
  const Complex tau(0.0, 1.0);
  const Complex lhs = char_det(J, z, tau);
  Matrix A = -oracle::floquet_by_action(J, tau);
  A.diagonal().array() += z;
  const Complex raw = -tau * oracle::leibniz_det(A);
  EXPECT_LE(std::abs(lhs - raw / 0.48), 1e-12);
  EXPECT_GT(std::abs(lhs - raw * 0.48), 1e-3);
  EXPECT_LE(verify_det_identity(J, z, tau), 1e-12);
}

TEST(DetIdentity, RandomOperators) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> r(0.5, 2.0);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  const auto J = random_operator(4, 2, 2024, 0.5);
  for (int k = 0; k < 50; ++k) {
    Complex z = random_z(rng, 3.0);
    if (std::abs(z) > 3.0) z *= 3.0 / std::abs(z);
    const Complex tau = std::polar(r(rng), ang(rng));
    EXPECT_LE(verify_det_identity(J, z, tau), 1e-8);
  }
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto R = random_operator(1 + seed % 6, 1 + seed % 3, seed + 9000, 0.7);
    EXPECT_LE(verify_det_identity(R, random_z(rng, 2.0), std::polar(r(rng), ang(rng))), 1e-8);
  }
}

TEST(DetIdentity, FarFromSpectrum) {
  const auto J = random_operator(3, 2, 4, 0.3);
  const Complex lhs = char_det(J, 10.0, 1.0);
  EXPECT_GT(std::abs(lhs), 1.0);
  EXPECT_LE(verify_det_identity(J, 10.0, 1.0), 1e-10);
}

TEST(SpectralMembership, FreeExamples) {
  const auto J = free_operator(1, 1);
  EXPECT_TRUE(spectral_membership(J, 0.0).member);
  const auto out = spectral_membership(J, 3.0);
  EXPECT_FALSE(out.member);
  EXPECT_NEAR(out.min_distance, 1.0 - (3.0 - std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_TRUE(spectral_membership(J, 2.0).member);
  EXPECT_TRUE(spectral_membership(free_operator(3, 2), 1.5).member);
  EXPECT_FALSE(spectral_membership(free_operator(3, 2), -2.5).member);
}

TEST(MultiplierPower, Examples) {
  EXPECT_LE(multiplier_power_check(random_operator(3, 2, 1, 0.5), 1, Complex(0.2, 0.1)), 1e-12);

  const auto sq = monodromy_matrix(period_extend(free_operator(1, 1), 2), 0.0).multipliers.values;
  const std::vector<Complex> want{-1.0, -1.0};
  EXPECT_LE(match_multisets(sq, want).max_deviation, 1e-7);
  EXPECT_LE(multiplier_power_check(free_operator(1, 1), 2, 0.0), 1e-7);
}

TEST(MultiplierPower, RandomOperators) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-2.2, 2.2);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto J = random_operator(1 + seed % 6, 1 + seed % 3, seed, 0.1);
    for (std::size_t k : {2u, 3u}) EXPECT_LE(multiplier_power_check(J, k, u(rng)), 1e-8) << seed;
  }
}

TEST(Multipliers, ReciprocalPairingAndConjugation) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto R = random_operator(1 + seed % 6, 1 + seed % 3, seed, 0.2, Field::Real);
    ASSERT_TRUE(has_real_coefficients(R));
    const double z = u(rng);
    EXPECT_LE(reciprocal_pairing_residual(R, z, false), 1e-8);
    EXPECT_LE(conjugation_closure_residual(R, z), 1e-8);

    const auto C = random_operator(1 + seed % 6, 1 + seed % 3, seed, 0.2);
    EXPECT_LE(reciprocal_pairing_residual(C, z, true), 1e-8);
  }
}
