#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flb/bands.hpp"
#include "flb/floquet.hpp"
#include "flb/operator.hpp"
#include "test_util.hpp"

using namespace flb;

namespace {

bool same_coefficients(const BlockJacobiOperator& x, const BlockJacobiOperator& y) {
  if (x.p != y.p || x.m != y.m) return false;
  for (std::size_t n = 0; n < x.p; ++n) {
    if (x.a[n] != y.a[n] || x.b[n] != y.b[n]) return false;
  }
  return true;
}

Matrix diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.cast<Complex>().asDiagonal();
}

}  // namespace

TEST(FreeOperator, Shapes) {
  const auto J = free_operator(3, 2);
  ASSERT_EQ(J.a.size(), 3u);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(J.a[n], identity(2));
    EXPECT_EQ(J.b[n], zeros(2));
  }
  EXPECT_DOUBLE_EQ(coupling_constant(J), 1.0);
  EXPECT_FLB_ERROR(free_operator(0, 2), ErrorCode::InvalidDimension);
  EXPECT_FLB_ERROR(free_operator(2, 0), ErrorCode::InvalidDimension);
}

TEST(FreeOperator, PeriodTwoFloquetAtOne) {
  const RealVector ev = floquet_eigenvalues(free_operator(2, 1), 1.0);
  EXPECT_NEAR(ev(0), -2.0, 1e-14);
  EXPECT_NEAR(ev(1), 2.0, 1e-14);
}

TEST(CouplingConstant, Examples) {
  BlockJacobiOperator J = free_operator(2, 2);
  J.a[0] = diag({2, 1});
  J.a[1] = diag({0.5, 1});
  EXPECT_DOUBLE_EQ(coupling_constant(J), 1.0);

  BlockJacobiOperator K = free_operator(1, 2);
  K.a[0] = diag({2, 3});
  EXPECT_DOUBLE_EQ(coupling_constant(K), 6.0);
}

TEST(Validate, Examples) {
  EXPECT_TRUE(validate(free_operator(3, 2)).ok);

  BlockJacobiOperator J = free_operator(2, 2);
  J.b[0](0, 1) = 1.0;
  auto report = validate(J);
  ASSERT_FALSE(report.ok);
  EXPECT_EQ(report.issues.front().code, ErrorCode::NotHermitian);
  EXPECT_EQ(report.issues.front().where, "b[0]");

  J = free_operator(2, 2);
  J.a[0] = diag({1, -1});
  report = validate(J);
  ASSERT_FALSE(report.ok);
  EXPECT_EQ(report.issues.front().code, ErrorCode::NotPositiveDefinite);
  EXPECT_NEAR(report.a_min_eigenvalue[0], -1.0, 1e-14);
}

TEST(Validate, ShapeAndFiniteness) {
  BlockJacobiOperator J = free_operator(2, 2);
  J.b.pop_back();
  EXPECT_FALSE(validate(J).ok);

  J = free_operator(2, 2);
  J.a[1] = identity(3);
  EXPECT_FALSE(validate(J).ok);

  J = free_operator(2, 2);
  J.b[1](0, 0) = std::nan("");
  const auto report = validate(J);
  ASSERT_FALSE(report.ok);
  EXPECT_EQ(report.issues.front().code, ErrorCode::NonFinite);
}

TEST(PeriodExtend, FreeScalar) {
  const auto J = period_extend(free_operator(1, 1), 3);
  EXPECT_TRUE(same_coefficients(J, free_operator(3, 1)));
  EXPECT_FLB_ERROR(period_extend(free_operator(1, 1), 0), ErrorCode::InvalidDimension);
}

TEST(PeriodExtend, EigenvalueSumAndCoupling) {
  const auto J = random_operator(3, 2, 17, 0.4);
  double trace_b = 0.0;
  for (const Matrix& b : J.b) trace_b += b.trace().real();
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto Jk = period_extend(J, k);
    for (double x : {0.0, 0.7, 2.9}) {
      EXPECT_NEAR(floquet_eigenvalues(Jk, unit(x)).sum(), static_cast<double>(k) * trace_b, 1e-10);
    }
  }
  const double c = coupling_constant(J);
  EXPECT_NEAR(coupling_constant(period_extend(J, 2)), c * c, 1e-12 * c * c);
}

TEST(PeriodExtend, CompositionIsExact) {
  const auto J = random_operator(2, 3, 4, 0.5);
  for (std::size_t j : {1u, 2u, 3u}) {
    for (std::size_t k : {1u, 2u, 4u}) {
      EXPECT_TRUE(same_coefficients(period_extend(period_extend(J, j), k), period_extend(J, j * k)));
    }
  }
}

TEST(Shift, Examples) {
  const auto J = random_operator(3, 2, 2, 0.5);
  EXPECT_TRUE(same_coefficients(shift_operator(J, 0.0), J));

  const auto F = free_operator(3, 2);
  const RealVector before = floquet_eigenvalues(F, unit(0.3));
  const RealVector after = floquet_eigenvalues(shift_operator(F, 1.0), unit(0.3));
  EXPECT_LE((after - (before.array() - 1.0).matrix()).cwiseAbs().maxCoeff(), 1e-13);

  const double s = trace_centering_shift(J);
  double centered = 0.0;
  for (const Matrix& b : shift_operator(J, s).b) centered += b.trace().real();
  EXPECT_NEAR(centered, 0.0, 1e-13);
}

TEST(Shift, RoundTripExactOnDyadicData) {
  // Subtraction then addition of s is exact when s and the diagonal entries
  // are dyadic rationals of moderate size.
  BlockJacobiOperator J = free_operator(3, 2);
  J.b[0] = diag({0.25, -1.5});
  J.b[2] = diag({3.0, 0.125});
  J.b[1](0, 1) = Complex(0.5, 0.75);
  J.b[1](1, 0) = Complex(0.5, -0.75);
  for (double s : {0.5, -1.25, 3.0, 0.0625}) {
    EXPECT_TRUE(same_coefficients(shift_operator(shift_operator(J, s), -s), J)) << s;
  }
}

TEST(Shift, RoundTripWithinRoundingOnRandomData) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto J = random_operator(4, 3, 100 + static_cast<std::uint64_t>(trial), 0.7);
    const double s = u(rng);
    const auto back = shift_operator(shift_operator(J, s), -s);
    for (std::size_t n = 0; n < J.p; ++n) {
      EXPECT_EQ(back.a[n], J.a[n]);
      EXPECT_LE((back.b[n] - J.b[n]).cwiseAbs().maxCoeff(), 4.0 * std::numeric_limits<double>::epsilon() * 4.0);
    }
  }
}

TEST(RandomOperator, DeterministicAndValid) {
  EXPECT_TRUE(same_coefficients(random_operator(3, 2, 9, 0.0), free_operator(3, 2)));
  EXPECT_TRUE(same_coefficients(random_operator(4, 3, 42, 0.5), random_operator(4, 3, 42, 0.5)));
  EXPECT_FALSE(same_coefficients(random_operator(4, 3, 42, 0.5), random_operator(4, 3, 43, 0.5)));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_TRUE(validate(random_operator(4, 3, seed, 0.5)).ok);
    EXPECT_TRUE(validate(random_operator(3, 2, seed, 3.0)).ok);  // large spread exercises the positivity shift
  }
  const auto R = random_operator(3, 3, 1, 0.5, Field::Real);
  for (const Matrix& a : R.a) EXPECT_TRUE(a.imag().isZero(0.0));
}

TEST(NormalizeCoupling, MakesCouplingOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_NEAR(coupling_constant(normalize_coupling(random_operator(3, 2, seed, 0.6))), 1.0, 1e-12);
  }
}

TEST(Gauge, IdentityInput) {
  const auto G = as_general(free_operator(3, 2));
  const auto r = gauge_normalize(G);
  EXPECT_TRUE(same_coefficients(r.normalized, free_operator(3, 2)) ||
              gauge_residuals(G, r).a < 1e-14);
  for (const Matrix& u : r.u) EXPECT_LE((u - identity(2)).norm(), 1e-14);
}

TEST(Gauge, ScalarSignFlip) {
  GeneralBlockJacobi G{1, 1, {Matrix::Constant(1, 1, -1.0)}, {zeros(1)}};
  const auto r = gauge_normalize(G);
  EXPECT_NEAR(std::abs(r.normalized.a[0](0, 0) - 1.0), 0.0, 1e-15);
  ASSERT_EQ(r.u.size(), 2u);
  EXPECT_NEAR(std::abs(r.u[0](0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.u[1](0, 0) + 1.0), 0.0, 1e-15);

  const auto bg = band_structure(G, 512);
  const auto bj = band_structure(r.normalized, 512);
  ASSERT_EQ(bg.N, 1u);
  EXPECT_NEAR(bg.bands[0].lo, -2.0, 1e-6);
  EXPECT_NEAR(bg.bands[0].hi, 2.0, 1e-6);
  EXPECT_TRUE(spectrum_equal(bg, bj, 1e-6));
}

TEST(Gauge, UnitaryTwistNormalizesToIdentity) {
  std::mt19937_64 rng(77);
  GeneralBlockJacobi G{3, 3, {}, {}};
  for (int n = 0; n < 3; ++n) {
    G.a.push_back(detail::random_unitary(3, rng));
    G.b.push_back(zeros(3));
  }
  const auto r = gauge_normalize(G);
  for (const Matrix& a : r.normalized.a) EXPECT_LE((a - identity(3)).norm(), 1e-12);
}

TEST(Gauge, FactorizationResidualProperty) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t p = 1 + seed % 4;
    const std::size_t m = 1 + (seed / 4) % 3;
    const auto G = random_general_operator(p, m, seed, 0.6);
    const auto r = gauge_normalize(G);
    ASSERT_TRUE(validate(r.normalized).ok);
    const auto res = gauge_residuals(G, r);
    EXPECT_LE(res.a, 1e-9);
    EXPECT_LE(res.b, 1e-9);
    EXPECT_LE(res.unitary, 1e-9);
  }
}

TEST(Gauge, SingularRejected) {
  GeneralBlockJacobi G = as_general(free_operator(2, 2));
  G.a[1] = zeros(2);
  EXPECT_FLB_ERROR(gauge_normalize(G), ErrorCode::Singular);
}
