#ifndef FRACSPEC_GRID_FUNCTION_HPP
#define FRACSPEC_GRID_FUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracspec/errors.hpp"

namespace fracspec {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/**
 * Values of a real function on the uniform grid x_i = i * 2pi / (N - 1),
 * i = 0..N-1, endpoints included.
 *
 * Every module shares this grid, so operations never resample between
 * modules. Off-grid evaluation is piecewise linear.
 */
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(std::vector<double> values, bool periodic = false)
      : values_(std::move(values)), periodic_(periodic) {
    if (values_.size() < 2) {
      throw domain_error("GridFunction: need at least 2 grid points");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw domain_error("GridFunction: non-finite value");
    }
    if (periodic_) {
      const double a = values_.front();
      const double b = values_.back();
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
        throw domain_error("GridFunction: periodic flag set but endpoint values differ");
      }
    }
  }

  template <class F>
  static GridFunction sample(std::size_t num_points, F&& f, bool periodic = false) {
    if (num_points < 2) throw domain_error("GridFunction: need at least 2 grid points");
    std::vector<double> v(num_points);
    const double h = two_pi / static_cast<double>(num_points - 1);
    for (std::size_t i = 0; i < num_points; ++i) v[i] = f(static_cast<double>(i) * h);
    if (periodic) v.back() = v.front();
    return GridFunction(std::move(v), periodic);
  }

  static double spacing_for(std::size_t num_points) {
    return two_pi / static_cast<double>(num_points - 1);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double spacing() const noexcept { return spacing_for(values_.size()); }
  double x(std::size_t i) const noexcept {
    // Exact 2pi at the last point.
    return i + 1 == values_.size() ? two_pi : static_cast<double>(i) * spacing();
  }
  bool periodic() const noexcept { return periodic_; }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  /// Piecewise-linear interpolation; lambda is clamped to [0, 2pi].
  double at(double lambda) const {
    if (!(lambda >= 0.0) || lambda > two_pi) {
      if (std::isnan(lambda)) throw domain_error("GridFunction::at: NaN argument");
      lambda = std::clamp(lambda, 0.0, two_pi);
    }
    const double u = lambda / spacing();
    auto k = static_cast<std::size_t>(u);
    if (k >= values_.size() - 1) return values_.back();
    const double t = u - static_cast<double>(k);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

  double sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool same_grid(const GridFunction& other) const noexcept { return size() == other.size(); }

 private:
  std::vector<double> values_;
  bool periodic_ = false;
};

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!a.same_grid(b)) throw domain_error("grid mismatch");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return GridFunction(std::move(v), a.periodic() && b.periodic());
}

inline GridFunction scaled(const GridFunction& a, double s) {
  std::vector<double> v(a.vector());
  for (double& x : v) x *= s;
  return GridFunction(std::move(v), a.periodic());
}

// ---------------------------------------------------------------------------
// CSV: optional '#' comment lines, a one-line header, then rows.
// ---------------------------------------------------------------------------

/// 17 significant digits, '.' decimal separator.
inline std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
}

inline void write_csv(std::ostream& os, const GridFunction& g,
                      const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << "# periodic = " << (g.periodic() ? 1 : 0) << '\n';
  os << "lambda,value\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << format_double(g.x(i)) << ',' << format_double(g[i]) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s) {
  std::istringstream is(trim(s));
  is.imbue(std::locale::classic());
  double v = 0.0;
  is >> v;
  if (is.fail() || !is.eof()) throw domain_error("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads the two-column `lambda,value` format; rejects non-uniform grids.
inline GridFunction read_csv(std::istream& is) {
  std::string line;
  bool header_seen = false;
  bool periodic = false;
  std::vector<double> lambdas;
  std::vector<double> values;
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("periodic = 1") != std::string::npos) periodic = true;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line != "lambda,value") throw domain_error("grid CSV: expected header 'lambda,value'");
      continue;
    }
    const auto cols = detail::split(line, ',');
    if (cols.size() != 2) throw domain_error("grid CSV: expected 2 columns: " + line);
    lambdas.push_back(detail::parse_double(cols[0]));
    values.push_back(detail::parse_double(cols[1]));
  }
  if (values.size() < 2) throw domain_error("grid CSV: fewer than 2 rows");
  const double h = GridFunction::spacing_for(values.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (std::abs(lambdas[i] - static_cast<double>(i) * h) > 1e-9) {
      throw domain_error("grid CSV: lambda column is not the uniform grid on [0, 2pi]");
    }
  }
  return GridFunction(std::move(values), periodic);
}

}  // namespace fracspec

#endif  // FRACSPEC_GRID_FUNCTION_HPP
