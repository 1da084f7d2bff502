#pragma once

// Chebyshev polynomials and the extremal problem
//   sup { Σ x_n² : x ∈ P_s(r) },
//   P_s(r) = { x_1 ≤ … ≤ x_s, Σ x_n = 0, |∏(z − x_n)| ≤ r on [x_1, x_s] },
// whose value is 2s(r/2)^{2/s}, attained by the zeros of r·T_s(z / (2(r/2)^{1/s})).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "flb/error.hpp"
#include "flb/polynomial.hpp"

namespace flb {

struct ExtremalProblem {
  std::size_t s = 2;
  double r = 0.0;
};

struct ExtremalConfig {
  std::vector<double> x;  // ascending
  double sum_squares = 0.0;
  double max_abs = 0.0;  // max over [x_1, x_s] of |∏(z − x_n)|
};

struct MembershipResult {
  bool member = false;
  bool sorted = false;
  bool zero_sum = false;
  double max_abs = 0.0;
  double slack = 0.0;  // max_abs − r
};

struct VieteMoments {
  double xi = 0.0;   // Σ z_n
  double eta = 0.0;  // Σ z_n²
};

inline constexpr double kMembershipTol = 1e-9;
inline constexpr std::size_t kFallbackSamples = 1000;

inline double cheb_eval(std::size_t s, double z) {
  if (std::abs(z) <= 1.0) return std::cos(static_cast<double>(s) * std::acos(z));
  double prev = 1.0;
  double cur = z;
  if (s == 0) return prev;
  for (std::size_t k = 1; k < s; ++k) {
    const double next = 2.0 * z * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {
inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t c = 1;
  for (std::int64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}
}  // namespace detail

/// Integer coefficients of T_s in ascending powers of z, from
///   T_s(z) = ½ Σ_{k=0}^{⌊s/2⌋} (−1)^k · s/(s−k) · C(s−k, k) · (2z)^{s−2k}.
inline std::vector<std::int64_t> cheb_coefficients(std::size_t s) {
  if (s == 0) return {1};
  const auto S = static_cast<std::int64_t>(s);
  std::vector<std::int64_t> c(s + 1, 0);
  for (std::int64_t k = 0; 2 * k <= S; ++k) {
    // s/(s−k)·C(s−k, k) is an integer; multiply first, then divide exactly.
    const std::int64_t weight = S * detail::binomial(S - k, k) / (S - k);
    const std::int64_t power = S - 2 * k;
    const std::int64_t half_pow2 = power == 0 ? 0 : (std::int64_t{1} << (power - 1));
    const std::int64_t term = power == 0 ? weight / 2 : weight * half_pow2;
    c[static_cast<std::size_t>(power)] = (k % 2 == 0 ? term : -term);
  }
  return c;
}

/// Zeros cos(π(2n−1)/(2s)), n = 1..s, in ascending order.
inline std::vector<double> cheb_zeros(std::size_t s) {
  std::vector<double> z(s);
  for (std::size_t n = 1; n <= s; ++n) {
    z[s - n] = std::cos(std::numbers::pi * static_cast<double>(2 * n - 1) / (2.0 * static_cast<double>(s)));
  }
  return z;
}

/// ξ = Σ z_n and η = Σ z_n² of the zeros of T_s, read off the two leading
/// coefficients via Viète.
inline VieteMoments viete_moments(std::size_t s) {
  if (s < 2) throw Error(ErrorCode::InvalidProblem, "viete_moments: s >= 2 required");
  const auto c = cheb_coefficients(s);
  const double lead = static_cast<double>(c[s]);
  const double xi = -static_cast<double>(c[s - 1]) / lead;
  const double eta = xi * xi - 2.0 * static_cast<double>(c[s - 2]) / lead;
  return {xi, eta};
}

inline void require_problem(std::size_t s, double r) {
  if (s < 2) throw Error(ErrorCode::InvalidProblem, "extremal problem needs s >= 2");
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidProblem, "extremal problem needs r >= 0");
}

inline double extremal_value(std::size_t s, double r) {
  require_problem(s, r);
  if (r == 0.0) return 0.0;
  return 2.0 * static_cast<double>(s) * std::pow(r / 2.0, 2.0 / static_cast<double>(s));
}

inline ExtremalConfig extremal_config(std::size_t s, double r) {
  require_problem(s, r);
  ExtremalConfig out;
  out.x.assign(s, 0.0);
  if (r == 0.0) return out;
  const double radius = 2.0 * std::pow(r / 2.0, 1.0 / static_cast<double>(s));
  const std::vector<double> z = cheb_zeros(s);
  for (std::size_t n = 0; n < s; ++n) out.x[n] = radius * z[n];
  for (double v : out.x) out.sum_squares += v * v;
  out.max_abs = poly::max_abs_on_hull(out.x, kFallbackSamples);
  return out;
}

inline MembershipResult membership(std::span<const double> x, double r) {
  MembershipResult out;
  if (x.empty()) return out;
  out.sorted = std::is_sorted(x.begin(), x.end());
  double sum = 0.0;
  double scale = 0.0;
  for (double v : x) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  out.zero_sum = std::abs(sum) <= kMembershipTol * std::max(1.0, scale * static_cast<double>(x.size()));
  out.max_abs = poly::max_abs_on_hull(x, kFallbackSamples);
  out.slack = out.max_abs - r;
  out.member = out.sorted && out.zero_sum && out.slack <= kMembershipTol * std::max(1.0, r);
  return out;
}

/// Randomized multi-start search for sup Σx² over P_s(r), independent of the
/// closed form. Every candidate is projected onto the boundary max|p| = r by
/// dilation (max|p| scales by t^s when all roots scale by t), then improved by
/// zero-sum pair moves x_i −= ε, x_j += ε. `budget` counts objective
/// evaluations over all starts.
inline double oracle_max_sum_squares(std::size_t s, double r, std::size_t budget, std::uint64_t seed) {
  require_problem(s, r);
  if (r == 0.0) return 0.0;
  const double sd = static_cast<double>(s);

  auto objective = [&](std::vector<double>& x) {
    std::sort(x.begin(), x.end());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= sd;
    for (double& v : x) v -= mean;
    double ss = 0.0;
    for (double v : x) ss += v * v;
    if (ss == 0.0) return 0.0;
    const double mx = poly::max_abs_on_hull(x);
    return ss * std::pow(r / mx, 2.0 / sd);
  };

  const std::size_t starts = std::clamp<std::size_t>(budget / 1000, 1, 16);
  const std::size_t per_start = std::max<std::size_t>(budget / starts, 1);
  double best = 0.0;

  for (std::size_t start = 0; start < starts; ++start) {
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(start)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, s - 1);

    std::vector<double> x(s);
    if (start % 2 == 0) {
      // Perturbed cosine nodes; the noise level grows with the start index.
      const double noise = 0.05 * static_cast<double>(start / 2 + 1);
      for (std::size_t n = 0; n < s; ++n) {
        x[n] = std::cos(std::numbers::pi * (static_cast<double>(n) + 0.5) / sd) + noise * normal(rng);
      }
    } else {
      for (double& v : x) v = normal(rng);
    }
    double f = objective(x);
    std::size_t evals = 1;
    double step = 0.1 * std::sqrt(std::max(f, 1e-12) / sd);

    while (evals < per_start && step > 1e-14) {
      std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      bool improved = false;
      for (double sign : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[i] -= sign * step;
        y[j] += sign * step;
        const double g = objective(y);
        ++evals;
        if (g > f) {
          x = std::move(y);
          f = g;
          improved = true;
          break;
        }
      }
      step *= improved ? 1.5 : 0.85;
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace flb
