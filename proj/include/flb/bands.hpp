#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "flb/error.hpp"
#include "flb/floquet.hpp"
#include "flb/linalg.hpp"

namespace flb {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BandStructure {
  std::vector<Interval> bands;  // sorted, disjoint
  std::vector<Interval> gaps;   // open intervals between consecutive bands
  std::size_t N = 0;
  std::size_t sample_count = 0;
};

/// Floquet eigenvalues on the grid x_k = 2πk/samples; row k holds the sorted
/// spectrum of K_p(e^{i x_k}).
struct BranchSamples {
  std::vector<double> x;
  Eigen::MatrixXd values;  // samples × pm
};

inline constexpr std::size_t kMinSamples = 16;
inline constexpr int kGoldenIterations = 64;
inline constexpr double kMergeTol = 1e-9;

template <typename Op>
BranchSamples sample_branches(const Op& J, std::size_t samples) {
  if (samples < kMinSamples) {
    throw Error(ErrorCode::InvalidResolution, "band_structure: at least 16 samples required");
  }
  require_valid(J);
  BranchSamples out;
  out.x.resize(samples);
  out.values.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(J.p * J.m));
  for (std::size_t k = 0; k < samples; ++k) {
    out.x[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
    out.values.row(static_cast<Eigen::Index>(k)) = floquet_eigenvalues(J, unit(out.x[k])).transpose();
  }
  return out;
}

namespace detail {

// Golden-section search for the extremum of f on [lo, hi]; `sign` = +1
// maximizes, −1 minimizes. Returns the best value seen.
template <typename F>
double golden_extremum(F f, double lo, double hi, double sign, int iterations) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = sign * f(c);
  double fd = sign * f(d);
  double best = std::max(fc, fd);
  for (int it = 0; it < iterations; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = sign * f(c);
      best = std::max(best, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = sign * f(d);
      best = std::max(best, fd);
    }
  }
  return sign * best;
}

inline std::vector<Interval> merge_intervals(std::vector<Interval> ranges, double tol) {
  std::sort(ranges.begin(), ranges.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  std::vector<Interval> out;
  for (const Interval& r : ranges) {
    if (!out.empty() && r.lo <= out.back().hi + tol) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace detail

template <typename Op>
BandStructure bands_from_samples(const Op& J, const BranchSamples& s) {
  const auto samples = static_cast<Eigen::Index>(s.x.size());
  const Eigen::Index branches = s.values.cols();
  const double step = 2.0 * std::numbers::pi / static_cast<double>(samples);
  const double scale = std::max(1.0, s.values.cwiseAbs().maxCoeff());

  std::vector<Interval> ranges;
  ranges.reserve(static_cast<std::size_t>(branches));
  for (Eigen::Index i = 0; i < branches; ++i) {
    Eigen::Index kmin = 0;
    Eigen::Index kmax = 0;
    double lo = s.values.col(i).minCoeff(&kmin);
    double hi = s.values.col(i).maxCoeff(&kmax);
    auto branch = [&](double x) { return floquet_eigenvalues(J, unit(x))(i); };
    const double xmin = s.x[static_cast<std::size_t>(kmin)];
    const double xmax = s.x[static_cast<std::size_t>(kmax)];
    lo = std::min(lo, detail::golden_extremum(branch, xmin - step, xmin + step, -1.0, kGoldenIterations));
    hi = std::max(hi, detail::golden_extremum(branch, xmax - step, xmax + step, 1.0, kGoldenIterations));
    ranges.push_back({lo, hi});
  }

  BandStructure out;
  out.sample_count = static_cast<std::size_t>(samples);
  out.bands = detail::merge_intervals(std::move(ranges), kMergeTol * scale);
  out.N = out.bands.size();
  for (std::size_t n = 1; n < out.bands.size(); ++n) {
    out.gaps.push_back({out.bands[n - 1].hi, out.bands[n].lo});
  }
  return out;
}

/// Band/gap structure of σ(J) from the ranges of the sorted Floquet branches
/// over the unit circle, with golden-section refinement of each endpoint.
template <typename Op>
BandStructure band_structure(const Op& J, std::size_t samples) {
  return bands_from_samples(J, sample_branches(J, samples));
}

inline bool spectrum_equal(const BandStructure& b1, const BandStructure& b2, double tol) {
  if (b1.N != b2.N || b1.bands.size() != b2.bands.size()) return false;
  for (std::size_t n = 0; n < b1.bands.size(); ++n) {
    if (std::abs(b1.bands[n].lo - b2.bands[n].lo) > tol) return false;
    if (std::abs(b1.bands[n].hi - b2.bands[n].hi) > tol) return false;
  }
  return true;
}

inline bool is_single_symmetric_band(const BandStructure& b, double tol) {
  return b.N == 1 && std::abs(b.bands.front().lo + b.bands.front().hi) <= tol;
}

inline bool in_bands(const BandStructure& b, double z) {
  return std::any_of(b.bands.begin(), b.bands.end(),
                     [z](const Interval& r) { return r.lo <= z && z <= r.hi; });
}

inline double distance_to_edges(const BandStructure& b, double z) {
  double d = std::numeric_limits<double>::infinity();
  for (const Interval& r : b.bands) d = std::min({d, std::abs(z - r.lo), std::abs(z - r.hi)});
  return d;
}

}  // namespace flb
