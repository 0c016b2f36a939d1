#ifndef FRACSPEC_FRACOPS_HPP
#define FRACSPEC_FRACOPS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/fft.hpp"
#include "fracspec/grid_function.hpp"

/**
 * @file
 * Riemann-Liouville fractional calculus on the shared uniform grid.
 *
 *   I^b[g](x) = 1/Gamma(b) * int_0^x g(t) (x - t)^(b - 1) dt,      0 < b <= 1
 *   D^a[g](x) = d/dx I^(1 - a)[g](x),                               0 < a < 1
 *
 * The integral is computed by product integration: g is replaced by its
 * piecewise-linear interpolant and the kernel moments over each cell are
 * integrated exactly, so the result is exact for piecewise-linear g.
 */

namespace fracspec {

inline double gamma_fn(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw domain_error("gamma_fn: argument must be positive and finite");
  }
  return std::tgamma(x);
}

namespace detail {

/**
 * Kernel moments of one grid cell, in units of the spacing h and with the
 * factor h^b / Gamma(b) removed. For a cell whose far end sits m steps
 * from the evaluation point (s in [m-1, m], s = distance / h):
 *
 *   near(m) = int_{m-1}^{m} s^(b-1) (m - s) ds        weight of the near node
 *   far(m)  = int_{m-1}^{m} s^(b-1) (s - m + 1) ds    weight of the far node
 *
 * Direct evaluation cancels badly for large m, so a binomial series in 1/m
 * is used there.
 */
struct CellMoments {
  double near;
  double far;
};

inline CellMoments cell_moments(double m, double b) {
  if (m >= 16.0) {
    // (1 - u/m)^(b-1) = sum_k c_k (u/m)^k, c_0 = 1, c_k = c_{k-1} (k - b) / k.
    double ck = 1.0;
    double mk = 1.0;
    double near = 0.0;
    double far = 0.0;
    for (int k = 0; k < 60; ++k) {
      const double t = ck * mk;
      near += t / (k + 2.0);
      far += t / ((k + 1.0) * (k + 2.0));
      if (std::abs(t) < 1e-18) break;
      ck *= (k + 1.0 - b) / (k + 1.0);
      mk /= m;
    }
    const double scale = std::pow(m, b - 1.0);
    return {near * scale, far * scale};
  }
  const double m1 = m - 1.0;
  const double pb = (std::pow(m, b) - (m1 > 0.0 ? std::pow(m1, b) : 0.0)) / b;
  const double pb1 = (std::pow(m, b + 1.0) - (m1 > 0.0 ? std::pow(m1, b + 1.0) : 0.0)) / (b + 1.0);
  return {m * pb - pb1, pb1 - m1 * pb};
}

inline void check_integral_order(double order) {
  if (!(order > 0.0 && order <= 1.0)) {
    throw domain_error("fractional integral order must lie in (0, 1]");
  }
}

}  // namespace detail

/**
 * Fractional integral of fixed order on a fixed grid size, with the
 * convolution weights (and their spectrum, for large grids) precomputed.
 *
 * On the uniform grid the product-integration rule is a Toeplitz convolution
 *
 *   I_i = h^b/Gamma(b) * ( sum_{k=0}^{i} c_k g_{i-k} - near(i+1) g_0 ),
 *   c_0 = near(1),  c_k = near(k+1) + far(k),
 *
 * evaluated directly for small grids and by FFT otherwise. Immutable and
 * shareable across threads.
 */
class FracIntegrator {
 public:
  FracIntegrator(std::size_t num_points, double order) : n_(num_points), order_(order) {
    detail::check_integral_order(order);
    if (num_points < 2) throw domain_error("frac_integral: grid needs at least 2 points");
    const double h = GridFunction::spacing_for(num_points);
    scale_ = std::pow(h, order) / gamma_fn(order);
    weights_.resize(n_);
    edge_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const auto m = static_cast<double>(k + 1);
      const auto next = detail::cell_moments(m, order);
      edge_[k] = next.near;
      weights_[k] = next.near + (k == 0 ? 0.0 : detail::cell_moments(static_cast<double>(k), order).far);
    }
    if (n_ > kDirectLimit) {
      const std::size_t len = next_pow2(2 * n_ - 1);
      dft_ = std::make_shared<RealDft>(len);
      std::vector<double> padded(len, 0.0);
      std::copy(weights_.begin(), weights_.end(), padded.begin());
      spectrum_ = dft_->forward(padded);
    }
  }

  std::size_t size() const noexcept { return n_; }
  double order() const noexcept { return order_; }

  std::vector<double> apply(std::span<const double> g) const {
    if (g.size() != n_) throw domain_error("frac_integral: grid size mismatch");
    std::vector<double> out(n_, 0.0);
    if (!dft_) {
      for (std::size_t i = 1; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += weights_[k] * g[i - k];
        out[i] = acc;
      }
    } else {
      const std::size_t len = dft_->size();
      std::vector<double> buf(len, 0.0);
      std::copy(g.begin(), g.end(), buf.begin());
      std::vector<std::complex<double>> spec(dft_->spectrum_size());
      dft_->forward(buf, spec);
      for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= spectrum_[k];
      dft_->inverse(spec, buf);
      const double inv_len = 1.0 / static_cast<double>(len);
      for (std::size_t i = 1; i < n_; ++i) out[i] = buf[i] * inv_len;
    }
    for (std::size_t i = 1; i < n_; ++i) out[i] = scale_ * (out[i] - edge_[i] * g[0]);
    out[0] = 0.0;
    return out;
  }

  GridFunction apply(const GridFunction& g) const { return GridFunction(apply(g.values())); }

 private:
  static constexpr std::size_t kDirectLimit = 256;

  std::size_t n_;
  double order_;
  double scale_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> edge_;  // near(i + 1)
  std::shared_ptr<RealDft> dft_;
  std::vector<std::complex<double>> spectrum_;
};

/// I^order[g] at every grid point; result[0] = 0.
inline GridFunction frac_integral(const GridFunction& g, double order) {
  if (g.size() < 2) throw domain_error("frac_integral: empty grid");
  return FracIntegrator(g.size(), order).apply(g);
}

/// I^order[g](x) at an arbitrary x in [0, 2pi], exact for the piecewise-linear
/// interpolant of g. O(N) per call.
inline double frac_integral_at(const GridFunction& g, double order, double x) {
  detail::check_integral_order(order);
  if (g.size() < 2) throw domain_error("frac_integral_at: empty grid");
  if (!(x >= 0.0 && x <= two_pi * (1.0 + 1e-15))) {
    throw domain_error("frac_integral_at: x outside [0, 2pi]");
  }
  x = std::min(x, two_pi);
  if (x == 0.0) return 0.0;
  const double h = g.spacing();
  const double u = x / h;
  auto k = static_cast<std::size_t>(u);
  if (k >= g.size() - 1) k = g.size() - 2;
  double frac = u - static_cast<double>(k);
  if (frac > 1.0) frac = 1.0;
  const auto v = g.values();

  double acc = 0.0;
  // Partial cell [x_k, x]: s in [0, frac].
  if (frac > 0.0) {
    const double slope = v[k + 1] - v[k];
    const double gx = v[k] + slope * frac;
    acc += gx * std::pow(frac, order) / order;
    // g(s) = g(x) - slope * s in distance units.
    acc -= slope * std::pow(frac, order + 1.0) / (order + 1.0);
  }
  // Full cells [x_j, x_{j+1}], j < k: s in [m - 1, m], m = frac + k - j.
  for (std::size_t j = 0; j < k; ++j) {
    const double m = frac + static_cast<double>(k - j);
    const auto w = detail::cell_moments(m, order);
    acc += w.near * v[j + 1] + w.far * v[j];
  }
  return acc * std::pow(h, order) / gamma_fn(order);
}

/**
 * D^order[g] = d/dx I^(1 - order)[g]: centred differences of the fractional
 * integral at interior points, a second-order one-sided difference at 2pi.
 * At x = 0 the derivative either vanishes or does not exist and is set to 0.
 */
inline GridFunction frac_derivative(const GridFunction& g, double order) {
  if (!(order > 0.0 && order < 1.0)) {
    throw domain_error("frac_derivative: order must lie in (0, 1)");
  }
  const auto integral = frac_integral(g, 1.0 - order);
  const auto iv = integral.values();
  const std::size_t n = g.size();
  const double h = g.spacing();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (iv[i + 1] - iv[i - 1]) / (2.0 * h);
  if (n >= 3) {
    d[n - 1] = (3.0 * iv[n - 1] - 4.0 * iv[n - 2] + iv[n - 3]) / (2.0 * h);
  } else {
    d[n - 1] = (iv[n - 1] - iv[n - 2]) / h;
  }
  for (double& x : d) {
    if (!std::isfinite(x)) x = 0.0;
  }
  return GridFunction(std::move(d));
}

namespace detail {

// max over windows of w + 1 consecutive samples of (max - min).
inline double sliding_range(std::span<const double> v, std::size_t w) {
  std::deque<std::size_t> hi;
  std::deque<std::size_t> lo;
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    while (!hi.empty() && v[hi.back()] <= v[i]) hi.pop_back();
    while (!lo.empty() && v[lo.back()] >= v[i]) lo.pop_back();
    hi.push_back(i);
    lo.push_back(i);
    if (hi.front() + w < i) hi.pop_front();
    if (lo.front() + w < i) lo.pop_front();
    best = std::max(best, v[hi.front()] - v[lo.front()]);
  }
  return best;
}

}  // namespace detail

/**
 * omega(g, h) = max |g(l) - g(m)| over grid pairs with |l - m| <= h. For
 * periodic g the distance is taken on the circle.
 */
inline double modulus_of_continuity(const GridFunction& g, double h) {
  const double dx = g.spacing();
  if (!(h >= dx * (1.0 - 1e-12))) {
    throw domain_error("modulus_of_continuity: h is below the grid spacing");
  }
  const auto w = static_cast<std::size_t>(std::floor(h / dx + 1e-9));
  const auto v = g.values();
  if (!g.periodic()) return detail::sliding_range(v, std::min(w, v.size() - 1));

  const std::size_t distinct = v.size() - 1;
  if (2 * w >= distinct) return detail::sliding_range(v, v.size() - 1);
  std::vector<double> wrapped(distinct + w);
  for (std::size_t i = 0; i < wrapped.size(); ++i) wrapped[i] = v[i % distinct];
  return detail::sliding_range(wrapped, w);
}

struct HolderNorm {
  double norm;
  double vanishing_ratio;
};

/**
 * sup|g| + max_{i != j} |g_i - g_j| / |x_i - x_j|^delta, plus the small-scale
 * ratio omega(g, h) / h^delta at the grid spacing. O(N^2).
 */
inline HolderNorm holder_norm(const GridFunction& g, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("holder_norm: delta must lie in (0, 1)");
  const auto v = g.values();
  const std::size_t n = v.size();
  const double h = g.spacing();
  // Distances are multiples of h; precompute (k h)^-delta.
  std::vector<double> inv_pow(n);
  for (std::size_t k = 1; k < n; ++k) inv_pow[k] = std::pow(static_cast<double>(k) * h, -delta);
  double seminorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      seminorm = std::max(seminorm, std::abs(v[i] - v[j]) * inv_pow[j - i]);
    }
  }
  return {g.sup_norm() + seminorm, modulus_of_continuity(g, h) * std::pow(h, -delta)};
}

}  // namespace fracspec

#endif  // FRACSPEC_FRACOPS_HPP
