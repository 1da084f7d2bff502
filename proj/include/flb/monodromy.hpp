#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "flb/error.hpp"
#include "flb/floquet.hpp"
#include "flb/linalg.hpp"
#include "flb/operator.hpp"

namespace flb {

struct FundamentalPair {
  Complex z;
  std::vector<Matrix> theta;  // ϑ_0 .. ϑ_{p+1}
  std::vector<Matrix> phi;    // φ_0 .. φ_{p+1}
};

struct MonodromyMatrix {
  Complex z;
  Matrix M;  // [[ϑ_p, φ_p], [ϑ_{p+1}, φ_{p+1}]]
  GeneralEigResult multipliers;
};

struct Membership {
  bool member = false;
  double min_distance = 0.0;  // min_j ||τ_j(z)| − 1|
};

inline constexpr double kCircleMembershipTol = 1e-6;

/// Solves a_n y_{n+1} + b_n y_n + a_{n-1} y_{n-1} = z y_n for n = 1..p from
/// (ϑ_0, ϑ_1) = (I, 0) and (φ_0, φ_1) = (0, I), with a_0 = a_p.
inline FundamentalPair fundamental_solutions(const BlockJacobiOperator& J, Complex z) {
  require_valid(J);
  const std::size_t p = J.p;
  const Matrix I = identity(J.m);
  FundamentalPair out{z, {I, zeros(J.m)}, {zeros(J.m), I}};
  out.theta.reserve(p + 2);
  out.phi.reserve(p + 2);
  for (std::size_t n = 1; n <= p; ++n) {
    const Matrix& a_n = J.a[n - 1];
    const Matrix& a_prev = J.a[(n + p - 2) % p];
    const Eigen::PartialPivLU<Matrix> lu(a_n);
    if (!std::isfinite(std::abs(lu.determinant())) || std::abs(lu.determinant()) == 0.0) {
      throw Error(ErrorCode::Singular, "fundamental_solutions: a_n is singular");
    }
    const Matrix shifted = z * I - J.b[n - 1];
    out.theta.push_back(lu.solve(shifted * out.theta[n] - a_prev * out.theta[n - 1]));
    out.phi.push_back(lu.solve(shifted * out.phi[n] - a_prev * out.phi[n - 1]));
  }
  return out;
}

inline Matrix monodromy_block(const BlockJacobiOperator& J, Complex z) {
  const FundamentalPair f = fundamental_solutions(J, z);
  const auto m = static_cast<Eigen::Index>(J.m);
  const std::size_t p = J.p;
  Matrix M(2 * m, 2 * m);
  M.block(0, 0, m, m) = f.theta[p];
  M.block(0, m, m, m) = f.phi[p];
  M.block(m, 0, m, m) = f.theta[p + 1];
  M.block(m, m, m, m) = f.phi[p + 1];
  return M;
}

inline MonodromyMatrix monodromy_matrix(const BlockJacobiOperator& J, Complex z) {
  Matrix M = monodromy_block(J, z);
  GeneralEigResult mult = gen_eig(M);
  return {z, std::move(M), std::move(mult)};
}

/// D_p(z, τ) = det(M_p(z) − τI).
inline Complex char_det(const BlockJacobiOperator& J, Complex z, Complex tau) {
  if (tau == Complex(0.0, 0.0)) throw Error(ErrorCode::ZeroTau, "char_det: tau = 0");
  Matrix M = monodromy_block(J, z);
  M.diagonal().array() -= tau;
  return det(M);
}

/// Right-hand side of the determinant identity,
///   D_p(z, τ) = c^{-1} (−τ)^m det(z − K_p(τ)).
inline Complex char_det_from_floquet(const BlockJacobiOperator& J, Complex z, Complex tau) {
  const FloquetMatrix F = build_floquet(J, tau);
  Matrix A = -F.K;
  A.diagonal().array() += z;
  return std::pow(-tau, static_cast<int>(J.m)) * det(A) / coupling_constant(J);
}

/// |D_p − c^{-1}(−τ)^m det(z − K_p(τ))| / max(1, |D_p|).
inline double verify_det_identity(const BlockJacobiOperator& J, Complex z, Complex tau) {
  const Complex lhs = char_det(J, z, tau);
  const Complex rhs = char_det_from_floquet(J, z, tau);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

/// |D_p − ∏_j (τ_j(z) − τ)| / max(1, |D_p|).
inline double verify_multiplier_product(const BlockJacobiOperator& J, Complex z, Complex tau) {
  const MonodromyMatrix mm = monodromy_matrix(J, z);
  Complex prod = 1.0;
  for (const Complex& t : mm.multipliers.values) prod *= t - tau;
  const Complex d = char_det(J, z, tau);
  return std::abs(d - prod) / std::max(1.0, std::abs(d));
}

inline Membership spectral_membership(const BlockJacobiOperator& J, double z,
                                      double circle_tol = kCircleMembershipTol) {
  const MonodromyMatrix mm = monodromy_matrix(J, z);
  double dist = std::numeric_limits<double>::infinity();
  for (const Complex& t : mm.multipliers.values) dist = std::min(dist, std::abs(std::abs(t) - 1.0));
  return {dist <= circle_tol, dist};
}

namespace detail {
inline double rel_scale(const Complex& x) {
  return std::max(1.0, std::abs(x));
}
}  // namespace detail

/// Matched-pair deviation between the multipliers of period_extend(J, k) at z
/// and the k-th powers of the multipliers of J, relative to max(1, |τ|).
inline double multiplier_power_check(const BlockJacobiOperator& J, std::size_t k, Complex z) {
  const auto base = monodromy_matrix(J, z).multipliers.values;
  std::vector<Complex> powered;
  powered.reserve(base.size());
  for (const Complex& t : base) powered.push_back(std::pow(t, static_cast<int>(k)));
  const auto ext = monodromy_matrix(period_extend(J, k), z).multipliers.values;
  return match_multisets(powered, ext, detail::rel_scale).max_deviation;
}

/// Deviation of the multiplier multiset from its image under τ ↦ 1/τ
/// (real coefficients) or τ ↦ 1/τ̄ (complex Hermitian coefficients).
inline double reciprocal_pairing_residual(const BlockJacobiOperator& J, double z, bool conjugate) {
  const auto mult = monodromy_matrix(J, z).multipliers.values;
  std::vector<Complex> image;
  image.reserve(mult.size());
  for (const Complex& t : mult) image.push_back(conjugate ? 1.0 / std::conj(t) : 1.0 / t);
  return match_multisets(mult, image, detail::rel_scale).max_deviation;
}

inline double conjugation_closure_residual(const BlockJacobiOperator& J, double z) {
  const auto mult = monodromy_matrix(J, z).multipliers.values;
  std::vector<Complex> image;
  image.reserve(mult.size());
  for (const Complex& t : mult) image.push_back(std::conj(t));
  return match_multisets(mult, image, detail::rel_scale).max_deviation;
}

inline bool has_real_coefficients(const BlockJacobiOperator& J) {
  auto real = [](const Matrix& x) { return x.imag().isZero(0.0); };
  return std::all_of(J.a.begin(), J.a.end(), real) && std::all_of(J.b.begin(), J.b.end(), real);
}

}  // namespace flb
