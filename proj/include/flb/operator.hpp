#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "flb/error.hpp"
#include "flb/linalg.hpp"

namespace flb {

/// p-periodic block Jacobi operator
///   (Jy)_n = a_n y_{n+1} + b_n y_n + a_{n-1} y_{n-1}
/// with Hermitian positive definite a_n and Hermitian b_n (m×m blocks).
/// `a[0]` holds a_1, `a[p-1]` holds a_p.
struct BlockJacobiOperator {
  std::size_t p = 0;
  std::size_t m = 0;
  std::vector<Matrix> a;
  std::vector<Matrix> b;
};

/// Same three-term structure with merely invertible off-diagonal blocks;
/// the lower diagonal carries the adjoints.
struct GeneralBlockJacobi {
  std::size_t p = 0;
  std::size_t m = 0;
  std::vector<Matrix> a;
  std::vector<Matrix> b;
};

struct GaugeResult {
  BlockJacobiOperator normalized;
  std::vector<Matrix> u;  // u_0 .. u_p
};

struct ValidationIssue {
  ErrorCode code;
  std::string where;  // e.g. "a[2]"
  double value;       // offending residual or eigenvalue
};

struct ValidationReport {
  bool ok = true;
  std::vector<double> a_hermiticity;
  std::vector<double> b_hermiticity;
  std::vector<double> a_min_eigenvalue;
  std::vector<ValidationIssue> issues;
};

enum class Field { Complex, Real };

namespace detail {

template <typename Op>
void check_shapes(const Op& J, ValidationReport& report) {
  auto add = [&](ErrorCode code, std::string where, double value) {
    report.ok = false;
    report.issues.push_back({code, std::move(where), value});
  };
  if (J.p < 1 || J.m < 1) {
    add(ErrorCode::InvalidDimension, "p,m", static_cast<double>(std::min(J.p, J.m)));
  }
  if (J.a.size() != J.p) add(ErrorCode::InvalidDimension, "a", static_cast<double>(J.a.size()));
  if (J.b.size() != J.p) add(ErrorCode::InvalidDimension, "b", static_cast<double>(J.b.size()));
  const auto m = static_cast<Eigen::Index>(J.m);
  for (std::size_t n = 0; n < J.a.size(); ++n) {
    if (J.a[n].rows() != m || J.a[n].cols() != m) {
      add(ErrorCode::InvalidDimension, "a[" + std::to_string(n) + "]", 0.0);
    } else if (!all_finite(J.a[n])) {
      add(ErrorCode::NonFinite, "a[" + std::to_string(n) + "]", 0.0);
    }
  }
  for (std::size_t n = 0; n < J.b.size(); ++n) {
    if (J.b[n].rows() != m || J.b[n].cols() != m) {
      add(ErrorCode::InvalidDimension, "b[" + std::to_string(n) + "]", 0.0);
    } else if (!all_finite(J.b[n])) {
      add(ErrorCode::NonFinite, "b[" + std::to_string(n) + "]", 0.0);
    }
  }
}

inline void check_b_hermitian(const std::vector<Matrix>& b, ValidationReport& report) {
  for (std::size_t n = 0; n < b.size(); ++n) {
    if (!all_finite(b[n]) || b[n].rows() != b[n].cols()) continue;
    const double r = hermiticity_residual(b[n]);
    report.b_hermiticity.push_back(r);
    if (r > tol::herm * frobenius(b[n])) {
      report.ok = false;
      report.issues.push_back({ErrorCode::NotHermitian, "b[" + std::to_string(n) + "]", r});
    }
  }
}

inline Matrix random_hermitian(std::size_t m, std::mt19937_64& rng, Field field) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double re = normal(rng);
      const double im = field == Field::Complex ? normal(rng) : 0.0;
      X(i, j) = Complex(re, im);
    }
  }
  return (X + X.adjoint()) / 2.0;
}

inline Matrix random_unitary(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(X);
  Matrix Q = qr.householderQ();
  // Fix column phases so the distribution does not depend on QR sign conventions.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    const Complex d = R(j, j);
    if (std::abs(d) > 0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

inline Matrix make_positive(Matrix A) {
  const RealVector ev = herm_eigenvalues(A);
  if (ev.size() > 0 && ev.minCoeff() <= 0.0) {
    A += (std::abs(ev.minCoeff()) + 0.1) * identity(static_cast<std::size_t>(A.rows()));
  }
  return A;
}

}  // namespace detail

inline BlockJacobiOperator free_operator(std::size_t p, std::size_t m) {
  if (p < 1 || m < 1) throw Error(ErrorCode::InvalidDimension, "free_operator: p and m must be >= 1");
  BlockJacobiOperator J{p, m, {}, {}};
  J.a.assign(p, identity(m));
  J.b.assign(p, zeros(m));
  return J;
}

inline ValidationReport validate(const BlockJacobiOperator& J) {
  ValidationReport report;
  detail::check_shapes(J, report);
  if (!report.ok) return report;
  for (std::size_t n = 0; n < J.p; ++n) {
    const Matrix& a = J.a[n];
    const double r = hermiticity_residual(a);
    report.a_hermiticity.push_back(r);
    if (r > tol::herm * frobenius(a)) {
      report.ok = false;
      report.issues.push_back({ErrorCode::NotHermitian, "a[" + std::to_string(n) + "]", r});
      report.a_min_eigenvalue.push_back(std::nan(""));
      continue;
    }
    const double lo = herm_eigenvalues(a).minCoeff();
    report.a_min_eigenvalue.push_back(lo);
    if (lo <= tol::sing * frobenius(a)) {
      report.ok = false;
      report.issues.push_back({ErrorCode::NotPositiveDefinite, "a[" + std::to_string(n) + "]", lo});
    }
  }
  detail::check_b_hermitian(J.b, report);
  return report;
}

inline ValidationReport validate(const GeneralBlockJacobi& G) {
  ValidationReport report;
  detail::check_shapes(G, report);
  if (!report.ok) return report;
  for (std::size_t n = 0; n < G.p; ++n) {
    const Eigen::JacobiSVD<Matrix> svd(G.a[n]);
    const double smin = svd.singularValues().minCoeff();
    report.a_min_eigenvalue.push_back(smin);
    if (smin <= tol::sing * std::max(frobenius(G.a[n]), 1e-300)) {
      report.ok = false;
      report.issues.push_back({ErrorCode::Singular, "a[" + std::to_string(n) + "]", smin});
    }
  }
  detail::check_b_hermitian(G.b, report);
  return report;
}

template <typename Op>
void require_valid(const Op& J) {
  const ValidationReport report = validate(J);
  if (!report.ok) {
    const auto& issue = report.issues.front();
    throw Error(issue.code, "invalid operator at " + issue.where);
  }
}

/// c = det(a_1 ⋯ a_p), evaluated as the product of block determinants.
inline double coupling_constant(const BlockJacobiOperator& J) {
  require_valid(J);
  double c = 1.0;
  for (const Matrix& a : J.a) c *= det(a).real();
  return c;
}

inline BlockJacobiOperator period_extend(const BlockJacobiOperator& J, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidDimension, "period_extend: k must be >= 1");
  BlockJacobiOperator out{J.p * k, J.m, {}, {}};
  out.a.reserve(out.p);
  out.b.reserve(out.p);
  for (std::size_t r = 0; r < k; ++r) {
    out.a.insert(out.a.end(), J.a.begin(), J.a.end());
    out.b.insert(out.b.end(), J.b.begin(), J.b.end());
  }
  return out;
}

/// b_n ← b_n − s·I. Only the diagonal entries of each b_n are touched.
inline BlockJacobiOperator shift_operator(const BlockJacobiOperator& J, double s) {
  BlockJacobiOperator out = J;
  for (Matrix& b : out.b) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, i) -= s;
  }
  return out;
}

/// The scalar s with Σ Tr(b_n − s I) = 0.
inline double trace_centering_shift(const BlockJacobiOperator& J) {
  double total = 0.0;
  for (const Matrix& b : J.b) total += b.trace().real();
  return total / static_cast<double>(J.p * J.m);
}

/// Rescales every a_n by c^{-1/(pm)} so the coupling constant becomes 1.
inline BlockJacobiOperator normalize_coupling(const BlockJacobiOperator& J) {
  const double c = coupling_constant(J);
  const double f = std::pow(c, -1.0 / static_cast<double>(J.p * J.m));
  BlockJacobiOperator out = J;
  for (Matrix& a : out.a) a *= f;
  return out;
}

inline BlockJacobiOperator random_operator(std::size_t p, std::size_t m, std::uint64_t seed,
                                           double spread, Field field = Field::Complex) {
  BlockJacobiOperator J = free_operator(p, m);
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < p; ++n) {
    J.a[n] = detail::make_positive(identity(m) + spread * detail::random_hermitian(m, rng, field));
    J.b[n] = spread * detail::random_hermitian(m, rng, field);
  }
  return J;
}

/// Random invertible ã_n = Q_n·P_n (Q_n unitary, P_n positive definite) and
/// Hermitian b̃_n.
inline GeneralBlockJacobi random_general_operator(std::size_t p, std::size_t m, std::uint64_t seed,
                                                  double spread) {
  if (p < 1 || m < 1) throw Error(ErrorCode::InvalidDimension, "random_general_operator");
  GeneralBlockJacobi G{p, m, {}, {}};
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < p; ++n) {
    const Matrix Q = detail::random_unitary(m, rng);
    const Matrix P =
        detail::make_positive(identity(m) + spread * detail::random_hermitian(m, rng, Field::Complex));
    G.a.push_back(Q * P);
    G.b.push_back(spread * detail::random_hermitian(m, rng, Field::Complex));
  }
  return G;
}

inline GeneralBlockJacobi as_general(const BlockJacobiOperator& J) {
  return {J.p, J.m, J.a, J.b};
}

/// Unitary gauge turning invertible off-diagonal blocks into positive
/// definite ones. Marches left to right from u_0 = I:
///   u_n^* ã_n = h·q  (left polar),  a_n = h,  u_{n+1} = q^*,  b_n = u_n^* b̃_n u_n,
/// so that ã_n = u_n a_n u_{n+1}^* and b̃_n = u_n b_n u_n^*.
inline GaugeResult gauge_normalize(const GeneralBlockJacobi& G) {
  require_valid(G);
  GaugeResult out;
  out.normalized = BlockJacobiOperator{G.p, G.m, {}, {}};
  out.u.reserve(G.p + 1);
  out.u.push_back(identity(G.m));
  for (std::size_t n = 0; n < G.p; ++n) {
    const Matrix& u = out.u.back();
    Matrix b = u.adjoint() * G.b[n] * u;
    out.normalized.b.push_back((b + b.adjoint()) / 2.0);
    PolarFactors f = polar_left(u.adjoint() * G.a[n]);
    out.normalized.a.push_back(std::move(f.h));
    out.u.push_back(f.q.adjoint());
  }
  return out;
}

struct GaugeResiduals {
  double a = 0.0;        // max_n ‖ã_n − u_n a_n u_{n+1}^*‖ / max(1, ‖ã_n‖)
  double b = 0.0;        // max_n ‖b̃_n − u_n b_n u_n^*‖ / max(1, ‖b̃_n‖)
  double unitary = 0.0;  // max_n ‖u_n u_n^* − I‖
};

inline GaugeResiduals gauge_residuals(const GeneralBlockJacobi& G, const GaugeResult& r) {
  GaugeResiduals out;
  const Matrix I = identity(G.m);
  for (std::size_t n = 0; n < G.p; ++n) {
    const Matrix& u0 = r.u[n];
    const Matrix& u1 = r.u[n + 1];
    out.a = std::max(out.a, (G.a[n] - u0 * r.normalized.a[n] * u1.adjoint()).norm() /
                                std::max(1.0, G.a[n].norm()));
    out.b = std::max(out.b, (G.b[n] - u0 * r.normalized.b[n] * u0.adjoint()).norm() /
                                std::max(1.0, G.b[n].norm()));
  }
  for (const Matrix& u : r.u) out.unitary = std::max(out.unitary, (u * u.adjoint() - I).norm());
  return out;
}

/// u_p. The march is periodic only up to this unitary: continuing past one
/// period gives u_{n+p} = u_n·W and a_{n+p} = W^* a_n W, b_{n+p} = W^* b_n W.
inline const Matrix& gauge_holonomy(const GaugeResult& r) {
  return r.u.back();
}

/// max_n of ‖[W, a_n]‖ and ‖[W, b_n]‖. Zero (always so for m = 1) exactly when
/// the p-periodic `normalized` operator is unitarily equivalent to the input.
inline double holonomy_commutator(const GaugeResult& r) {
  const Matrix& W = gauge_holonomy(r);
  double worst = 0.0;
  for (std::size_t n = 0; n < r.normalized.p; ++n) {
    worst = std::max(worst, (W * r.normalized.a[n] - r.normalized.a[n] * W).norm());
    worst = std::max(worst, (W * r.normalized.b[n] - r.normalized.b[n] * W).norm());
  }
  return worst;
}

/// The periodic operator that is exactly equivalent to the input: the
/// normalized coefficients with the holonomy folded into the last coupling,
/// a_p -> a_p W^*. Its a_n are positive definite for n < p.
inline GeneralBlockJacobi twisted_normal_form(const GaugeResult& r) {
  GeneralBlockJacobi out = as_general(r.normalized);
  out.a.back() = out.a.back() * gauge_holonomy(r).adjoint();
  return out;
}

}  // namespace flb
