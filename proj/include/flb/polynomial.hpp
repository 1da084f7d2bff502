#pragma once

// Real polynomials given by their roots or by ascending coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace flb::poly {

/// ∏ (z − x_n), evaluated factor by factor.
inline double eval_from_roots(std::span<const double> roots, double z) {
  double v = 1.0;
  for (double x : roots) v *= z - x;
  return v;
}

/// Ascending coefficients of the monic polynomial with the given roots.
inline std::vector<double> from_roots(std::span<const double> roots) {
  std::vector<double> c{1.0};
  for (double x : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= x * c[i];
    }
    c = std::move(next);
  }
  return c;
}

inline double horner(std::span<const double> c, double z) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + *it;
  return v;
}

inline std::vector<double> derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

/// Roots of a polynomial (ascending coefficients, nonzero leading term) as
/// eigenvalues of its companion matrix.
inline std::vector<std::complex<double>> companion_roots(std::span<const double> c) {
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  const double lead = c.back();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t i = 1; i < deg; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i) {
    C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -c[i] / lead;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Real critical points of ∏(z − x_n) inside [min x, max x]: companion-matrix
/// roots of the derivative, polished by Newton steps on p'(z).
inline std::vector<double> critical_points(std::span<const double> roots) {
  if (roots.size() < 2) return {};
  const auto [lo_it, hi_it] = std::minmax_element(roots.begin(), roots.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const std::vector<double> c = from_roots(roots);
  const std::vector<double> d1 = derivative(c);
  const std::vector<double> d2 = derivative(d1);
  std::vector<double> out;
  for (const auto& w : companion_roots(d1)) {
    double z = std::clamp(w.real(), lo, hi);
    for (int it = 0; it < 4; ++it) {
      const double f2 = horner(d2, z);
      if (f2 == 0.0) break;
      const double next = z - horner(d1, z) / f2;
      if (!std::isfinite(next) || next < lo || next > hi) break;
      z = next;
    }
    out.push_back(z);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// max |∏(z − x_n)| over [min x, max x], from the critical points and the
/// endpoints; `fallback_samples` > 0 adds a uniform sampling cross-check.
inline double max_abs_on_hull(std::span<const double> roots, std::size_t fallback_samples = 0) {
  if (roots.empty()) return 1.0;
  const auto [lo_it, hi_it] = std::minmax_element(roots.begin(), roots.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  double best = std::max(std::abs(eval_from_roots(roots, lo)), std::abs(eval_from_roots(roots, hi)));
  for (double z : critical_points(roots)) best = std::max(best, std::abs(eval_from_roots(roots, z)));
  if (fallback_samples > 1 && hi > lo) {
    for (std::size_t k = 0; k < fallback_samples; ++k) {
      const double z = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(fallback_samples - 1);
      best = std::max(best, std::abs(eval_from_roots(roots, z)));
    }
  }
  return best;
}

}  // namespace flb::poly
