#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "flb/error.hpp"
#include "flb/linalg.hpp"
#include "flb/operator.hpp"

namespace flb {

inline constexpr double kCircleTol = 1e-12;

struct FloquetMatrix {
  Complex tau;
  Matrix K;
};

/// Σλ and Σλ² of K_p(τ) against their coefficient-side expressions.
struct MomentReport {
  Complex tau;
  double S1 = 0.0;
  double S2 = 0.0;
  double rhs1 = 0.0;
  double rhs2 = 0.0;
  double certificate = 0.0;  // S2 − 2pm·c^{2/(pm)}
  std::size_t extension = 1;  // S2 and rhs2 were computed at period p·extension
};

struct TraceResiduals {
  double s1 = 0.0;
  double s2 = 0.0;
};

namespace detail {

// Block (n, n+1) holds upper[n], block (n+1, n) its adjoint; the wrap-around
// coupling puts τ·upper[p-1] in the bottom-left corner and τ^{-1}·upper[p-1]^*
// in the top-right one. Overlapping blocks (p ≤ 2) add up.
inline Matrix assemble_floquet(const std::vector<Matrix>& upper, const std::vector<Matrix>& diag,
                               std::size_t m, Complex tau, Complex tau_inv) {
  const std::size_t p = diag.size();
  const auto M = static_cast<Eigen::Index>(m);
  Matrix K = Matrix::Zero(static_cast<Eigen::Index>(p * m), static_cast<Eigen::Index>(p * m));
  for (std::size_t n = 0; n < p; ++n) {
    const auto i = static_cast<Eigen::Index>(n) * M;
    K.block(i, i, M, M) += diag[n];
    if (n + 1 < p) {
      K.block(i, i + M, M, M) += upper[n];
      K.block(i + M, i, M, M) += upper[n].adjoint();
    }
  }
  const auto last = static_cast<Eigen::Index>(p - 1) * M;
  K.block(last, 0, M, M) += tau * upper[p - 1];
  K.block(0, last, M, M) += tau_inv * upper[p - 1].adjoint();
  return K;
}

inline void require_on_circle(Complex tau, const char* what) {
  if (std::abs(std::abs(tau) - 1.0) > kCircleTol) {
    throw Error(ErrorCode::OffCircle, std::string(what) + ": |tau| must be 1");
  }
}

inline double sum_trace(const std::vector<Matrix>& blocks) {
  double s = 0.0;
  for (const Matrix& x : blocks) s += x.trace().real();
  return s;
}

}  // namespace detail

/// K_p(τ) for any τ ≠ 0; Hermitian when |τ| = 1.
inline FloquetMatrix build_floquet(const BlockJacobiOperator& J, Complex tau) {
  if (tau == Complex(0.0, 0.0)) throw Error(ErrorCode::ZeroTau, "build_floquet: tau = 0");
  return {tau, detail::assemble_floquet(J.a, J.b, J.m, tau, 1.0 / tau)};
}

inline FloquetMatrix build_floquet(const GeneralBlockJacobi& G, Complex tau) {
  if (tau == Complex(0.0, 0.0)) throw Error(ErrorCode::ZeroTau, "build_floquet: tau = 0");
  return {tau, detail::assemble_floquet(G.a, G.b, G.m, tau, 1.0 / tau)};
}

template <typename Op>
RealVector floquet_eigenvalues(const Op& J, Complex tau) {
  detail::require_on_circle(tau, "floquet_eigenvalues");
  // On the circle τ^{-1} = τ̄; using the conjugate makes K exactly Hermitian,
  // which matters when blocks cancel and ‖K‖ is at rounding level.
  const Complex t = tau / std::abs(tau);
  return herm_eigenvalues(detail::assemble_floquet(J.a, J.b, J.m, t, std::conj(t)));
}

inline Complex unit(double x) {
  return std::polar(1.0, x);
}

/// Period extension applied before second moments are compared; K_p for
/// p ≤ 2 folds the wrap-around coupling onto the ordinary off-diagonal
/// blocks, which makes Tr K² depend on τ.
inline std::size_t moment_extension_factor(std::size_t p) {
  return p < 3 ? 3 : 1;
}

inline MomentReport moment_report(const BlockJacobiOperator& J, Complex tau) {
  detail::require_on_circle(tau, "moment_report");
  MomentReport r;
  r.tau = tau;
  r.S1 = floquet_eigenvalues(J, tau).sum();
  r.rhs1 = detail::sum_trace(J.b);

  r.extension = moment_extension_factor(J.p);
  const BlockJacobiOperator Je = r.extension == 1 ? J : period_extend(J, r.extension);
  const RealVector ev = floquet_eigenvalues(Je, tau);
  const double k = static_cast<double>(r.extension);
  r.S2 = ev.squaredNorm() / k;
  double rhs2 = 0.0;
  for (std::size_t n = 0; n < Je.p; ++n) {
    rhs2 += (Je.b[n] * Je.b[n]).trace().real() + 2.0 * (Je.a[n] * Je.a[n]).trace().real();
  }
  r.rhs2 = rhs2 / k;

  const double pm = static_cast<double>(J.p * J.m);
  r.certificate = r.S2 - 2.0 * pm * std::pow(coupling_constant(J), 2.0 / pm);
  return r;
}

/// (|S1 − rhs1|, |S2 − rhs2|). S1 is taken at the native period; S2 after the
/// small-period extension.
inline TraceResiduals verify_trace_identities(const BlockJacobiOperator& J, Complex tau) {
  const MomentReport r = moment_report(J, tau);
  return {std::abs(r.S1 - r.rhs1), std::abs(r.S2 - r.rhs2)};
}

inline bool trace_identities_hold(const MomentReport& r, double rel_tol = 1e-9) {
  return std::abs(r.S1 - r.rhs1) <= rel_tol * std::max(1.0, std::abs(r.rhs1)) &&
         std::abs(r.S2 - r.rhs2) <= rel_tol * std::max(1.0, std::abs(r.rhs2));
}

}  // namespace flb
