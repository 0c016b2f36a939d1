#ifndef FRACSPEC_STATS_HPP
#define FRACSPEC_STATS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fracspec/errors.hpp"

namespace fracspec::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw domain_error("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Unbiased sample covariance.
inline double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw domain_error("covariance: need >= 2 paired values");
  const double mx = mean(x);
  const double my = mean(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

inline double variance(std::span<const double> x) { return covariance(x, x); }

/// Sample quantile, linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw domain_error("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("quantile: p outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// (E|x|^p)^(1/p).
inline double lp_norm(std::span<const double> x, double p) {
  if (x.empty()) throw domain_error("lp_norm: empty sample");
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s / static_cast<double>(x.size()), 1.0 / p);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// sup |F_emp - Phi| of the sample against the standard normal.
inline double ks_statistic_normal(std::vector<double> x) {
  if (x.empty()) throw domain_error("ks_statistic: empty sample");
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return d;
}

/// Kolmogorov survival function Q(t) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 t^2).
inline double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // the series is 1 to double precision here
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Asymptotic p-value of the one-sample KS statistic with Stephens' small-sample
/// correction t = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) d.
inline double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

/// Least-squares polynomial fit y ~ sum_k c_k x^k, k = 0..degree.
inline std::vector<double> polyfit(std::span<const double> x, std::span<const double> y,
                                   int degree) {
  if (x.size() != y.size() || x.size() < static_cast<std::size_t>(degree + 1)) {
    throw domain_error("polyfit: not enough points");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k, p *= x[static_cast<std::size_t>(i)]) a(i, k) = p;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

}  // namespace fracspec::stats

#endif  // FRACSPEC_STATS_HPP
