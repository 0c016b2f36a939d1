#ifndef FRACSPEC_SPECMODEL_HPP
#define FRACSPEC_SPECMODEL_HPP

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/fft.hpp"
#include "fracspec/fracops.hpp"
#include "fracspec/grid_function.hpp"

namespace fracspec {

enum class ModelKind { constant, ar1, custom_grid };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::constant: return "constant";
    case ModelKind::ar1: return "ar1";
    case ModelKind::custom_grid: return "custom_grid";
  }
  return "?";
}

/**
 * Even, 2pi-periodic spectral density bounded away from zero and infinity,
 * C1 <= f <= C2. The covariance convention is
 *
 *   r(m) = int_{-pi}^{pi} cos(lambda m) f(lambda) d lambda,
 *
 * so white noise of unit variance has f = 1 / (2 pi).
 */
class SpectralModel {
 public:
  static SpectralModel constant(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw domain_error("constant model: c must be positive");
    SpectralModel m;
    m.kind_ = ModelKind::constant;
    m.c_ = c;
    m.c1_ = m.c2_ = c;
    return m;
  }

  static SpectralModel ar1(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw domain_error("ar1 model: rho must lie in (-1, 1)");
    SpectralModel m;
    m.kind_ = ModelKind::ar1;
    m.rho_ = rho;
    const double a = std::abs(rho);
    m.c1_ = (1.0 - a) / (two_pi * (1.0 + a));
    m.c2_ = (1.0 + a) / (two_pi * (1.0 - a));
    return m;
  }

  /// Density given on the shared grid, interpolated piecewise linearly.
  static SpectralModel custom(const GridFunction& density, std::string source = {}) {
    const auto v = density.values();
    const std::size_t n = v.size();
    double lo = v[0];
    double hi = v[0];
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
      if (std::abs(v[i] - v[n - 1 - i]) > 1e-12 * std::max(1.0, std::abs(v[i]))) {
        throw domain_error("custom_grid model: density is not even, f(l) != f(2pi - l)");
      }
    }
    if (!(lo > 0.0)) throw domain_error("custom_grid model: density must be strictly positive");
    SpectralModel m;
    m.kind_ = ModelKind::custom_grid;
    m.grid_ = GridFunction(std::vector<double>(v.begin(), v.end()), true);
    m.source_ = std::move(source);
    m.c1_ = lo;
    m.c2_ = hi;
    return m;
  }

  ModelKind kind() const noexcept { return kind_; }
  double level() const noexcept { return c_; }
  double rho() const noexcept { return rho_; }
  const GridFunction& grid() const noexcept { return grid_; }
  const std::string& source() const noexcept { return source_; }
  std::pair<double, double> bounds() const noexcept { return {c1_, c2_}; }

  /// f(lambda) for any real lambda (2pi-periodic extension).
  double density(double lambda) const {
    switch (kind_) {
      case ModelKind::constant: return c_;
      case ModelKind::ar1:
        return (1.0 - rho_ * rho_) /
               (two_pi * (1.0 - 2.0 * rho_ * std::cos(lambda) + rho_ * rho_));
      case ModelKind::custom_grid: {
        double x = std::fmod(lambda, two_pi);
        if (x < 0.0) x += two_pi;
        return grid_.at(x);
      }
    }
    return 0.0;
  }

  std::string id() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case ModelKind::constant: os << "constant(c=" << c_ << ")"; break;
      case ModelKind::ar1: os << "ar1(rho=" << rho_ << ")"; break;
      case ModelKind::custom_grid:
        os << "custom_grid(" << (source_.empty() ? "inline" : source_) << ", N=" << grid_.size()
           << ")";
        break;
    }
    return os.str();
  }

  /// `[model]` configuration block with keys kind, c, rho, grid_csv_path.
  void write_config(std::ostream& os) const {
    os << "[model]\n";
    os << "kind = " << to_string(kind_) << '\n';
    if (kind_ == ModelKind::constant) os << "c = " << format_double(c_) << '\n';
    if (kind_ == ModelKind::ar1) os << "rho = " << format_double(rho_) << '\n';
    if (kind_ == ModelKind::custom_grid) os << "grid_csv_path = " << source_ << '\n';
  }

 private:
  SpectralModel() = default;

  ModelKind kind_ = ModelKind::constant;
  double c_ = 0.0;
  double rho_ = 0.0;
  GridFunction grid_;
  std::string source_;
  double c1_ = 0.0;
  double c2_ = 0.0;
};

namespace detail {

// 2 pi * (m * j mod (N - 1)) / (N - 1): exact argument reduction for cos(m x_j).
inline double grid_phase(std::int64_t m, std::size_t j, std::size_t num_points) {
  const auto period = static_cast<std::int64_t>(num_points - 1);
  std::int64_t r = (m % period) * static_cast<std::int64_t>(j % static_cast<std::size_t>(period));
  r %= period;
  return two_pi * static_cast<double>(r) / static_cast<double>(period);
}

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// int_0^x f(t)^power dt for power in {1, 2}.
inline double integrate_density(const SpectralModel& model, double x, int power) {
  if (x <= 0.0) return 0.0;
  switch (model.kind()) {
    case ModelKind::constant: return std::pow(model.level(), power) * x;
    case ModelKind::ar1: {
      // analytic integrand with period 2pi; 20-point Gauss-Legendre on 64
      // panels is at machine precision for |rho| <= 0.9
      const int panels = 64;
      const double w = x / panels;
      double acc = 0.0;
      for (int p = 0; p < panels; ++p) {
        acc += gauss_legendre(
            [&](double t) { return std::pow(model.density(t), power); }, p * w, (p + 1) * w);
      }
      return acc;
    }
    case ModelKind::custom_grid: {
      // Piecewise-linear f: exact per cell (Simpson is exact for quadratics).
      const auto& g = model.grid();
      const double h = g.spacing();
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        const double a = g.x(j);
        if (a >= x) break;
        const double b = std::min(x, a + h);
        const double fa = g[j];
        const double fb = g.at(b);
        const double fm = 0.5 * (fa + fb);
        if (power == 1) {
          acc += 0.5 * (b - a) * (fa + fb);
        } else {
          acc += (b - a) / 6.0 * (fa * fa + 4.0 * fm * fm + fb * fb);
        }
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace detail

/// r(m) = int_{-pi}^{pi} cos(lambda m) f(lambda) d lambda; r(-m) = r(m).
inline double autocovariance(const SpectralModel& model, std::int64_t m) {
  m = m < 0 ? -m : m;
  switch (model.kind()) {
    case ModelKind::constant: return m == 0 ? two_pi * model.level() : 0.0;
    case ModelKind::ar1: return std::pow(model.rho(), static_cast<double>(m));
    case ModelKind::custom_grid: {
      // Fourier transform of the hat-function expansion of the interpolant:
      // r(m) = h sinc^2(m h / 2) sum_{j < N-1} f_j cos(m x_j). Periodicity
      // merges the two endpoint half-hats into one.
      const auto& g = model.grid();
      const double h = g.spacing();
      const double half = 0.5 * static_cast<double>(m) * h;
      const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        acc += g[j] * std::cos(detail::grid_phase(m, j, g.size()));
      }
      return h * sinc * sinc * acc;
    }
  }
  return 0.0;
}

/// F(lambda) = int_0^lambda f, lambda in [0, 2pi]; F(0) = 0.
inline double spectral_function(const SpectralModel& model, double lambda) {
  if (!(lambda >= 0.0 && lambda <= two_pi * (1.0 + 1e-15))) {
    throw domain_error("spectral_function: lambda outside [0, 2pi]");
  }
  lambda = std::min(lambda, two_pi);
  switch (model.kind()) {
    case ModelKind::constant: return model.level() * lambda;
    case ModelKind::ar1: {
      // Integral of the Poisson kernel; F(pi) = 1/2 and F(2pi - l) = 1 - F(l).
      const double rho = model.rho();
      const double k = (1.0 + rho) / (1.0 - rho);
      auto left = [k](double l) {
        return l >= std::numbers::pi ? 0.5 : std::atan(k * std::tan(0.5 * l)) / std::numbers::pi;
      };
      return lambda <= std::numbers::pi ? left(lambda) : 1.0 - left(two_pi - lambda);
    }
    case ModelKind::custom_grid: return detail::integrate_density(model, lambda, 1);
  }
  return 0.0;
}

inline void check_alpha(double alpha, bool allow_zero) {
  const bool ok = allow_zero ? (alpha >= 0.0 && alpha < 0.5) : (alpha > 0.0 && alpha < 0.5);
  if (!ok) {
    throw domain_error(allow_zero ? "alpha must lie in [0, 1/2)" : "alpha must lie in (0, 1/2)");
  }
}

/// Fine-grid size used for ground-truth fractional integrals of smooth densities.
inline constexpr std::size_t truth_grid_points = 65537;

/// F^(alpha)(lambda) = I^(1 - alpha)[f](lambda). alpha = 0 gives F exactly.
inline double frac_spectral_derivative(const SpectralModel& model, double alpha, double lambda) {
  check_alpha(alpha, true);
  if (!(lambda >= 0.0 && lambda <= two_pi * (1.0 + 1e-15))) {
    throw domain_error("frac_spectral_derivative: lambda outside [0, 2pi]");
  }
  lambda = std::min(lambda, two_pi);
  if (alpha == 0.0) return spectral_function(model, lambda);
  switch (model.kind()) {
    case ModelKind::constant:
      return model.level() * std::pow(lambda, 1.0 - alpha) / gamma_fn(2.0 - alpha);
    case ModelKind::ar1: {
      const auto f = GridFunction::sample(truth_grid_points, [&](double x) {
        return model.density(x);
      }, true);
      return frac_integral_at(f, 1.0 - alpha, lambda);
    }
    case ModelKind::custom_grid: return frac_integral_at(model.grid(), 1.0 - alpha, lambda);
  }
  return 0.0;
}

/// F^(alpha) on the shared grid of `num_points` points.
inline GridFunction frac_spectral_derivative_grid(const SpectralModel& model, double alpha,
                                                  std::size_t num_points) {
  check_alpha(alpha, true);
  if (num_points < 2) throw domain_error("frac_spectral_derivative_grid: need >= 2 points");
  const double h = GridFunction::spacing_for(num_points);
  std::vector<double> out(num_points);
  if (alpha == 0.0 || model.kind() == ModelKind::constant) {
    for (std::size_t i = 0; i < num_points; ++i) {
      out[i] = frac_spectral_derivative(model, alpha, std::min(two_pi, static_cast<double>(i) * h));
    }
    return GridFunction(std::move(out));
  }
  if (model.kind() == ModelKind::custom_grid) {
    const auto& g = model.grid();
    if (g.size() == num_points) return frac_integral(g, 1.0 - alpha);
    for (std::size_t i = 0; i < num_points; ++i) {
      out[i] = frac_integral_at(g, 1.0 - alpha, std::min(two_pi, static_cast<double>(i) * h));
    }
    return GridFunction(std::move(out));
  }
  // Smooth density: integrate on a nested fine grid and subsample.
  const std::size_t cells = num_points - 1;
  const std::size_t refine = (truth_grid_points - 1 + cells - 1) / cells;
  const std::size_t fine_points = cells * refine + 1;
  const auto f = GridFunction::sample(fine_points, [&](double x) { return model.density(x); }, true);
  const auto fine = FracIntegrator(fine_points, 1.0 - alpha).apply(f.values());
  for (std::size_t i = 0; i < num_points; ++i) out[i] = fine[i * refine];
  return GridFunction(std::move(out));
}

/// Phi_n(l) = sin^2(n l / 2) / (2 pi n sin^2(l / 2)); n / (2 pi) at l = 0 mod 2pi.
inline double fejer_kernel(std::int64_t n, double lambda) {
  if (n < 1) throw domain_error("fejer_kernel: n must be >= 1");
  const double s = std::sin(0.5 * lambda);
  const auto nd = static_cast<double>(n);
  if (s == 0.0 || std::abs(s) < 1e-300) return nd / two_pi;
  const double t = std::sin(0.5 * nd * lambda);
  return t * t / (two_pi * nd * s * s);
}

/**
 * E J_n = Phi_n * f on the shared grid, evaluated through the equivalent
 * finite Fourier series
 *
 *   (Phi_n * f)(l) = (1 / 2pi) sum_{|m| < n} (1 - |m|/n) r(m) exp(i m l),
 *
 * folded onto the N - 1 grid frequencies and summed with one real FFT; exact
 * up to rounding given exact r(m).
 */
inline GridFunction expected_periodogram(const SpectralModel& model, std::int64_t n,
                                         std::size_t out_grid) {
  if (n < 1) throw domain_error("expected_periodogram: n must be >= 1");
  if (out_grid < 2) throw domain_error("expected_periodogram: need >= 2 grid points");
  const std::size_t period = out_grid - 1;
  std::vector<double> folded(period, 0.0);
  const auto nd = static_cast<double>(n);
  for (std::int64_t m = 0; m < n; ++m) {
    const double r = autocovariance(model, m);
    if (r == 0.0) continue;
    const double w = (1.0 - static_cast<double>(m) / nd) * r;
    folded[static_cast<std::size_t>(m) % period] += w;
    if (m > 0) folded[(period - static_cast<std::size_t>(m) % period) % period] += w;
  }
  std::vector<double> out(out_grid);
  if (period == 1) {
    out[0] = out[1] = folded[0] / two_pi;
    return GridFunction(std::move(out), true);
  }
  RealDft dft(period);
  const auto spec = dft.forward(folded);
  for (std::size_t j = 0; j < period; ++j) {
    const std::size_t k = j <= period / 2 ? j : period - j;
    out[j] = spec[k].real() / two_pi;
  }
  out[period] = out[0];
  return GridFunction(std::move(out), true);
}

/// beta^2(lambda) = 4 pi int_0^lambda f^2.
inline double beta_squared(const SpectralModel& model, double lambda) {
  if (!(lambda >= 0.0 && lambda <= two_pi * (1.0 + 1e-15))) {
    throw domain_error("beta_squared: lambda outside [0, 2pi]");
  }
  return 4.0 * std::numbers::pi * detail::integrate_density(model, std::min(lambda, two_pi), 2);
}

/// d_beta(lambda, mu) = |beta(lambda) - beta(mu)|.
inline double beta_distance(const SpectralModel& model, double lambda, double mu) {
  if (lambda == mu) return 0.0;
  return std::abs(std::sqrt(beta_squared(model, lambda)) - std::sqrt(beta_squared(model, mu)));
}

// ---------------------------------------------------------------------------
// Limit covariance
// ---------------------------------------------------------------------------

namespace detail {

/**
 * J = int_0^lo f^2(lo - t) t^-alpha (t + d)^-alpha dt for lo > 0, d >= 0.
 *
 * Substituting t = lo s^q with q = 1 / (1 - 2 alpha) turns the worst case
 * (d = 0, kernel t^-2alpha) into a bounded integrand; geometric panels toward
 * s = 0 resolve the transition at s ~ (d / lo)^(1/q) when 0 < d << lo. Panels
 * are refined until successive levels agree.
 */
inline double singular_product_integral(const SpectralModel& model, double alpha, double lo,
                                        double d, double tol) {
  const double q = 1.0 / (1.0 - 2.0 * alpha);
  const double lo_pow = std::pow(lo, 1.0 - alpha) * q;
  auto integrand = [&](double s) {
    const double sq = std::pow(s, q);
    const double f = model.density(lo * (1.0 - sq));
    double kernel;
    if (d == 0.0) {
      kernel = std::pow(lo, -alpha);
    } else {
      kernel = std::pow(s, alpha * q) * std::pow(lo * sq + d, -alpha);
    }
    return lo_pow * kernel * f * f;
  };
  double prev = 0.0;
  for (int level = 0; level <= 20; ++level) {
    const int geometric = 12 + 4 * level;
    const int split = 1 + level;
    double acc = 0.0;
    double right = 1.0;
    for (int p = 0; p < geometric; ++p) {
      const double left = p + 1 == geometric ? 0.0 : right * 0.5;
      const double w = (right - left) / split;
      for (int k = 0; k < split; ++k) {
        acc += gauss_legendre(integrand, left + k * w, left + (k + 1) * w);
      }
      right = left;
    }
    if (level > 0 && std::abs(acc - prev) <= tol) return acc;
    prev = acc;
  }
  throw numerical_error("limit covariance quadrature did not converge after 20 refinements");
}

/// Same integral for a piecewise-linear density: cellwise Gauss-Legendre in t
/// (f^2 is a quadratic on each cell), with the singular first cell handled by
/// the graded rule above restricted to that cell.
inline double singular_product_integral_custom(const SpectralModel& model, double alpha,
                                               double lo, double d, double tol) {
  const auto& g = model.grid();
  const double h = g.spacing();
  auto kernel = [&](double t) {
    const double f = model.density(lo - t);
    return std::pow(t, -alpha) * std::pow(t + d, -alpha) * f * f;
  };
  // Cell boundaries in t are lo - x_j; the first one above 0 is lo - floor(lo/h) h.
  double first = lo - std::floor(lo / h * (1.0 - 1e-15)) * h;
  if (first <= 0.0) first = std::min(lo, h);
  first = std::min(first, lo);
  // Singular cell [0, first]: f is linear there, reuse the graded rule on a
  // linear density by local substitution.
  const double q = 1.0 / (1.0 - 2.0 * alpha);
  auto graded = [&](double s) {
    const double sq = std::pow(s, q);
    const double t = first * sq;
    const double f = model.density(lo - t);
    const double ker = d == 0.0 ? std::pow(first, -alpha)
                                : std::pow(s, alpha * q) * std::pow(first * sq + d, -alpha);
    return std::pow(first, 1.0 - alpha) * q * ker * f * f;
  };
  double head = 0.0;
  double prev = 0.0;
  bool converged = false;
  for (int level = 0; level <= 20; ++level) {
    const int geometric = 12 + 4 * level;
    double acc = 0.0;
    double right = 1.0;
    for (int p = 0; p < geometric; ++p) {
      const double left = p + 1 == geometric ? 0.0 : right * 0.5;
      acc += gauss_legendre(graded, left, right);
      right = left;
    }
    if (level > 0 && std::abs(acc - prev) <= tol) {
      head = acc;
      converged = true;
      break;
    }
    prev = acc;
  }
  if (!converged) {
    throw numerical_error("limit covariance quadrature did not converge after 20 refinements");
  }
  double tail = 0.0;
  for (double a = first; a < lo - 1e-14 * lo; a += h) {
    tail += gauss_legendre(kernel, a, std::min(lo, a + h));
  }
  return head + tail;
}

}  // namespace detail

/**
 * Theta_alpha(l, m) = 4 pi / Gamma(1 - alpha)^2
 *                     * int_0^min(l, m) f^2(v) (l - v)^-alpha (m - v)^-alpha dv.
 */
inline double limit_covariance_entry(const SpectralModel& model, double alpha, double lambda,
                                     double mu) {
  if (!(alpha >= 0.0 && alpha < 0.5)) throw domain_error("alpha must lie in [0, 1/2)");
  if (!(lambda >= 0.0 && mu >= 0.0 && lambda <= two_pi * (1 + 1e-15) && mu <= two_pi * (1 + 1e-15))) {
    throw domain_error("limit covariance: arguments outside [0, 2pi]");
  }
  const double lo = std::min(lambda, mu);
  if (lo == 0.0) return 0.0;
  const double d = std::abs(lambda - mu);
  const double g = gamma_fn(1.0 - alpha);
  const double scale = 4.0 * std::numbers::pi / (g * g);
  const double tol = 1e-10 / scale;
  const double integral = model.kind() == ModelKind::custom_grid
                              ? detail::singular_product_integral_custom(model, alpha, lo, d, tol)
                              : detail::singular_product_integral(model, alpha, lo, d, tol);
  return scale * integral;
}

/**
 * sigma^2_alpha(l) = Theta_alpha(l, l)
 *                  = 4 pi Gamma(1 - 2 alpha) / Gamma(1 - alpha)^2 * I^(1 - 2 alpha)[f^2](l),
 * computed through the fractional integral of f^2 rather than the product
 * kernel; an independent route to the diagonal of Theta_alpha. The kernel
 * (l - v)^(-2 alpha) is that of I^(1 - 2 alpha); the order coincides with
 * 2 alpha only at alpha = 1/4.
 */
inline double limit_variance(const SpectralModel& model, double alpha, double lambda) {
  check_alpha(alpha, false);
  if (!(lambda >= 0.0 && lambda <= two_pi * (1 + 1e-15))) {
    throw domain_error("limit_variance: lambda outside [0, 2pi]");
  }
  const double g = gamma_fn(1.0 - alpha);
  const double scale = 4.0 * std::numbers::pi * gamma_fn(1.0 - 2.0 * alpha) / (g * g);
  const double order = 1.0 - 2.0 * alpha;
  if (model.kind() == ModelKind::constant) {
    const double c = model.level();
    return scale * c * c * std::pow(lambda, order) / gamma_fn(1.0 + order);
  }
  std::size_t points = truth_grid_points;
  if (model.kind() == ModelKind::custom_grid) {
    // nested refinement so that the interpolant of f^2 tracks the quadratic cells
    const std::size_t cells = model.grid().size() - 1;
    points = cells * std::max<std::size_t>(1, (truth_grid_points - 1) / cells) + 1;
  }
  const auto f2 = GridFunction::sample(points, [&](double x) {
    const double f = model.density(x);
    return f * f;
  }, true);
  return scale * frac_integral_at(f2, order, std::min(lambda, two_pi));
}

/**
 * Theta_alpha on a probe grid together with its PSD projection (negative
 * eigenvalues clipped to zero) and a lower-triangular factor of the
 * projection.
 */
struct LimitCovariance {
  double alpha = 0.0;
  std::vector<double> probe_grid;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd projected;
  Eigen::MatrixXd factor;
  bool clip_applied = false;
  double clipped_mass = 0.0;  // sum of |clipped eigenvalues|

  std::size_t size() const noexcept { return probe_grid.size(); }
};

namespace detail {

/// Cholesky for positive semidefinite input; pivots at or below
/// `rel_tol * max diag` are treated as zero and their column dropped.
inline Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& a, double rel_tol = 1e-14) {
  const auto n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  const double max_diag = n > 0 ? a.diagonal().maxCoeff() : 0.0;
  const double floor = rel_tol * std::max(max_diag, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= floor) continue;
    const double root = std::sqrt(d);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
    }
  }
  return l;
}

}  // namespace detail

inline LimitCovariance limit_covariance_from_matrix(double alpha, std::vector<double> probes,
                                                    Eigen::MatrixXd matrix) {
  LimitCovariance out;
  out.alpha = alpha;
  out.probe_grid = std::move(probes);
  out.matrix = std::move(matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
  if (eig.info() != Eigen::Success) {
    throw numerical_error("limit covariance: eigen-decomposition failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) {
      out.clip_applied = true;
      out.clipped_mass += -values(i);
      values(i) = 0.0;
    }
  }
  if (out.clip_applied) {
    out.projected = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    out.projected = 0.5 * (out.projected + out.projected.transpose()).eval();
  } else {
    out.projected = out.matrix;
  }
  out.factor = detail::semidefinite_cholesky(out.projected);
  return out;
}

inline LimitCovariance limit_covariance(const SpectralModel& model, double alpha,
                                        std::vector<double> probe_grid) {
  check_alpha(alpha, false);
  for (double p : probe_grid) {
    if (!(p > 0.0 && p <= two_pi * (1 + 1e-15))) {
      throw domain_error("limit_covariance: probes must lie in (0, 2pi]");
    }
  }
  const auto k = static_cast<Eigen::Index>(probe_grid.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      m(i, j) = m(j, i) = limit_covariance_entry(model, alpha, probe_grid[static_cast<std::size_t>(i)],
                                                 probe_grid[static_cast<std::size_t>(j)]);
    }
  }
  return limit_covariance_from_matrix(alpha, std::move(probe_grid), std::move(m));
}

/// CSV: header row of probe lambdas, then K rows of the (unprojected) matrix.
inline void write_csv(std::ostream& os, const LimitCovariance& cov,
                      const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << "# alpha = " << format_double(cov.alpha) << '\n';
  os << "# clip_applied = " << (cov.clip_applied ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < cov.size(); ++i) {
    os << (i ? "," : "") << format_double(cov.probe_grid[i]);
  }
  os << '\n';
  for (Eigen::Index i = 0; i < cov.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.matrix.cols(); ++j) {
      os << (j ? "," : "") << format_double(cov.matrix(i, j));
    }
    os << '\n';
  }
}

inline LimitCovariance read_limit_covariance_csv(std::istream& is) {
  std::string line;
  double alpha = 0.0;
  std::vector<double> probes;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("alpha =");
      if (pos != std::string::npos) alpha = detail::parse_double(line.substr(pos + 7));
      continue;
    }
    std::vector<double> vals;
    for (const auto& c : detail::split(line, ',')) vals.push_back(detail::parse_double(c));
    if (probes.empty()) {
      probes = std::move(vals);
    } else {
      if (vals.size() != probes.size()) throw domain_error("covariance CSV: ragged row");
      rows.push_back(std::move(vals));
    }
  }
  if (rows.size() != probes.size()) throw domain_error("covariance CSV: expected a square matrix");
  const auto k = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return limit_covariance_from_matrix(alpha, std::move(probes), std::move(m));
}

}  // namespace fracspec

#endif  // FRACSPEC_SPECMODEL_HPP
