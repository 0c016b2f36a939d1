#ifndef FRACSPEC_ESTIMATE_HPP
#define FRACSPEC_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/fft.hpp"
#include "fracspec/fracops.hpp"
#include "fracspec/grid_function.hpp"
#include "fracspec/gsim.hpp"
#include "fracspec/specmodel.hpp"

namespace fracspec {

/// J_n on the shared grid.
struct Periodogram {
  std::size_t n = 0;
  GridFunction grid_fn;
};

/// F_{alpha,n} = I^(1 - alpha)[J_n] on the shared grid.
struct FracEstimate {
  double alpha = 0.0;
  std::size_t n = 0;
  GridFunction grid_fn;
};

/**
 * Default evaluation grid for a sample of length n: 4 max(n, 1024) + 1 points,
 * capped at 65537. The +1 makes the spacing 2pi / 2^k for power-of-two n, so
 * pi and pi/2 are grid points.
 */
inline std::size_t default_grid_points(std::size_t n) {
  const std::size_t cells = std::min<std::size_t>(4 * std::max<std::size_t>(n, 1024), 65536);
  return cells + 1;
}

/**
 * J_n(l) = (2 pi n)^-1 |sum_{k=1}^n exp(i k l) eta_k|^2 at every grid point.
 *
 * The grid frequencies are l_j = 2 pi j / P with P = num_points - 1, so the sum
 * is exactly a length-P DFT of eta folded modulo P; no interpolation between
 * Fourier frequencies is involved. The value at 2pi repeats the value at 0.
 */
class PeriodogramEngine {
 public:
  explicit PeriodogramEngine(std::size_t num_points) : points_(num_points) {
    if (num_points < 2) throw domain_error("periodogram: need >= 2 grid points");
    if (num_points > 2) dft_ = std::make_shared<RealDft>(num_points - 1);
  }

  std::size_t num_points() const noexcept { return points_; }

  Periodogram operator()(std::span<const double> eta) const {
    const std::size_t n = eta.size();
    if (n == 0) throw domain_error("periodogram: empty sample");
    const std::size_t period = points_ - 1;
    std::vector<double> folded(period, 0.0);
    // k = 1..n; the common phase exp(i l) does not change the modulus, but the
    // folding index must follow k itself.
    for (std::size_t k = 1; k <= n; ++k) folded[k % period] += eta[k - 1];
    const double norm = 1.0 / (two_pi * static_cast<double>(n));
    std::vector<double> out(points_);
    if (!dft_) {
      double s = 0.0;
      for (double v : folded) s += v;
      out[0] = out[1] = s * s * norm;
    } else {
      std::vector<std::complex<double>> spec(dft_->spectrum_size());
      dft_->forward(folded, spec);
      for (std::size_t j = 0; j < period; ++j) {
        const std::size_t k = j <= period / 2 ? j : period - j;
        out[j] = std::norm(spec[k]) * norm;
      }
      out[period] = out[0];
    }
    return {n, GridFunction(std::move(out), true)};
  }

 private:
  std::size_t points_;
  std::shared_ptr<RealDft> dft_;
};

inline Periodogram periodogram(std::span<const double> eta, std::size_t num_points) {
  return PeriodogramEngine(num_points)(eta);
}

inline Periodogram periodogram(const SamplePath& path, std::size_t num_points) {
  return periodogram(path.values, num_points);
}

/// F_n(l) = int_0^l J_n, cumulative trapezoid.
inline GridFunction empirical_spectral_function(const Periodogram& j) {
  const auto& g = j.grid_fn;
  const double h = g.spacing();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
  return GridFunction(std::move(out));
}

/// F_{alpha,n} with a prepared integrator of order 1 - alpha on the periodogram's grid.
inline FracEstimate frac_estimate(const Periodogram& j, double alpha,
                                  const FracIntegrator& integrator) {
  check_alpha(alpha, true);
  if (integrator.size() != j.grid_fn.size() || integrator.order() != 1.0 - alpha) {
    throw domain_error("frac_estimate: integrator does not match grid or order");
  }
  return {alpha, j.n, integrator.apply(j.grid_fn)};
}

inline FracEstimate frac_estimate(const Periodogram& j, double alpha) {
  check_alpha(alpha, true);
  return frac_estimate(j, alpha, FracIntegrator(j.grid_fn.size(), 1.0 - alpha));
}

/**
 * Plug-in estimate of sigma^2_alpha(l):
 *
 *   bias_correction * 4 pi Gamma(1 - 2 alpha) / Gamma(1 - alpha)^2 * I^(1 - 2 alpha)[J_n^2](l).
 *
 * For Gaussian data E J_n^2 -> 2 f^2 away from 0 and pi, hence the default
 * correction 1/2; bias_correction = 1 gives the raw statistic.
 */
inline double plugin_variance(const Periodogram& j, double alpha, double lambda,
                              double bias_correction = 0.5) {
  check_alpha(alpha, false);
  if (!(lambda > 0.0 && lambda <= two_pi * (1 + 1e-15))) {
    throw domain_error("plugin_variance: lambda outside (0, 2pi]");
  }
  if (!(bias_correction > 0.0) || !std::isfinite(bias_correction)) {
    throw domain_error("plugin_variance: bias_correction must be positive");
  }
  std::vector<double> sq(j.grid_fn.vector());
  for (double& v : sq) v *= v;
  const double g = gamma_fn(1.0 - alpha);
  const double scale = 4.0 * std::numbers::pi * gamma_fn(1.0 - 2.0 * alpha) / (g * g);
  return bias_correction * scale *
         frac_integral_at(GridFunction(std::move(sq)), 1.0 - 2.0 * alpha, std::min(lambda, two_pi));
}

inline void write_csv(std::ostream& os, const Periodogram& j, std::vector<std::string> comments = {}) {
  comments.push_back("n = " + std::to_string(j.n));
  write_csv(os, j.grid_fn, comments);
}

inline void write_csv(std::ostream& os, const FracEstimate& e, std::vector<std::string> comments = {}) {
  comments.push_back("n = " + std::to_string(e.n));
  comments.push_back("alpha = " + format_double(e.alpha));
  write_csv(os, e.grid_fn, comments);
}

}  // namespace fracspec

#endif  // FRACSPEC_ESTIMATE_HPP
