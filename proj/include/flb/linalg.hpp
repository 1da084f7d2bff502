#pragma once

// Dense complex kernels shared by the spectral modules. Everything here is a
// thin, contract-checking layer over Eigen's dense solvers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flb/error.hpp"

namespace flb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-10;
inline constexpr double eig = 1e-10;
inline constexpr double gen = 1e-8;
inline constexpr double sing = 1e-12;
}  // namespace tol

struct HermEigResult {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

struct GeneralEigResult {
  std::vector<Complex> values;  // multiset, unordered
};

struct PolarFactors {
  Matrix h;  // Hermitian positive definite
  Matrix q;  // unitary
};

inline bool all_finite(const Matrix& A) {
  return A.allFinite();
}

inline double frobenius(const Matrix& A) {
  return A.norm();
}

inline double hermiticity_residual(const Matrix& A) {
  return (A - A.adjoint()).norm();
}

inline void require_square(const Matrix& A, const char* what) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidDimension, std::string(what) + ": matrix is not square");
  }
}

inline void require_finite(const Matrix& A, const char* what) {
  if (!all_finite(A)) {
    throw Error(ErrorCode::NonFinite, std::string(what) + ": NaN or Inf entry");
  }
}

/// Full spectrum of a Hermitian matrix, ascending, with orthonormal
/// eigenvectors. The input is symmetrized before the solve so round-off
/// asymmetry below `herm_tol` never leaks into complex eigenvalues.
inline HermEigResult herm_eig(const Matrix& A, double herm_tol = tol::herm) {
  require_square(A, "herm_eig");
  require_finite(A, "herm_eig");
  if (hermiticity_residual(A) > herm_tol * frobenius(A)) {
    throw Error(ErrorCode::NotHermitian, "herm_eig: asymmetry above tolerance");
  }
  if (A.rows() == 0) return {};
  const Matrix sym = (A + A.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "herm_eig: solver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector herm_eigenvalues(const Matrix& A, double herm_tol = tol::herm) {
  require_square(A, "herm_eigenvalues");
  require_finite(A, "herm_eigenvalues");
  if (hermiticity_residual(A) > herm_tol * frobenius(A)) {
    throw Error(ErrorCode::NotHermitian, "herm_eigenvalues: asymmetry above tolerance");
  }
  if (A.rows() == 0) return {};
  const Matrix sym = (A + A.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "herm_eigenvalues: solver did not converge");
  }
  return solver.eigenvalues();
}

inline GeneralEigResult gen_eig(const Matrix& A) {
  require_square(A, "gen_eig");
  require_finite(A, "gen_eig");
  if (A.rows() == 0) return {};
  Eigen::ComplexEigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "gen_eig: iteration budget exhausted");
  }
  const auto& ev = solver.eigenvalues();
  return {std::vector<Complex>(ev.data(), ev.data() + ev.size())};
}

inline Complex det(const Matrix& A) {
  require_square(A, "det");
  require_finite(A, "det");
  if (A.rows() == 0) return {1.0, 0.0};
  return Eigen::PartialPivLU<Matrix>(A).determinant();
}

inline Matrix sqrt_pd(const Matrix& A) {
  require_square(A, "sqrt_pd");
  require_finite(A, "sqrt_pd");
  const double scale = frobenius(A);
  if (hermiticity_residual(A) > tol::herm * scale) {
    throw Error(ErrorCode::NotPositiveDefinite, "sqrt_pd: input is not Hermitian");
  }
  const auto eig = herm_eig(A);
  if (eig.values.size() > 0 && eig.values.minCoeff() <= tol::sing * scale) {
    throw Error(ErrorCode::NotPositiveDefinite, "sqrt_pd: smallest eigenvalue not positive");
  }
  const RealVector roots = eig.values.cwiseSqrt();
  Matrix S = eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return (S + S.adjoint()) / 2.0;
}

/// Left polar decomposition A = h·q with h = (A A^*)^{1/2}.
inline PolarFactors polar_left(const Matrix& A) {
  require_square(A, "polar_left");
  require_finite(A, "polar_left");
  const Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0) return {};
  if (s.minCoeff() <= tol::sing * std::max(frobenius(A), std::numeric_limits<double>::min())) {
    throw Error(ErrorCode::Singular, "polar_left: matrix is numerically singular");
  }
  const Matrix& U = svd.matrixU();
  Matrix h = U * s.cast<Complex>().asDiagonal() * U.adjoint();
  h = (h + h.adjoint()) / 2.0;
  Matrix q = U * svd.matrixV().adjoint();
  return {std::move(h), std::move(q)};
}

inline Matrix identity(std::size_t n) {
  return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

inline Matrix zeros(std::size_t n) {
  return Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

inline bool lex_less(const Complex& x, const Complex& y) {
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

struct MultisetMatch {
  double max_deviation = 0.0;
  std::vector<double> deviations;  // one per element of the first multiset, in sorted order
};

/// Greedy minimal-distance matching: both multisets sorted lexicographically,
/// each element of `a` (in order) takes the nearest unused element of `b`.
/// `scale(x)` divides the distance of a pair whose reference value is x;
/// pass nothing for absolute distances. Sizes that differ yield +inf.
template <typename Scale>
MultisetMatch match_multisets(std::span<const Complex> a, std::span<const Complex> b, Scale scale) {
  MultisetMatch out;
  if (a.size() != b.size()) {
    out.max_deviation = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<Complex> sa(a.begin(), a.end());
  std::vector<Complex> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end(), lex_less);
  std::sort(sb.begin(), sb.end(), lex_less);
  std::vector<bool> used(sb.size(), false);
  out.deviations.reserve(sa.size());
  for (const Complex& x : sa) {
    std::size_t best = sb.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sb.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - sb[j]);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    used[best] = true;
    const double dev = best_dist / scale(x);
    out.deviations.push_back(dev);
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

inline MultisetMatch match_multisets(std::span<const Complex> a, std::span<const Complex> b) {
  return match_multisets(a, b, [](const Complex&) { return 1.0; });
}

inline MultisetMatch match_real_multisets(std::span<const double> a, std::span<const double> b) {
  std::vector<Complex> ca(a.begin(), a.end());
  std::vector<Complex> cb(b.begin(), b.end());
  return match_multisets(ca, cb);
}

}  // namespace flb
