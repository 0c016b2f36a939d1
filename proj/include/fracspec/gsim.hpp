#ifndef FRACSPEC_GSIM_HPP
#define FRACSPEC_GSIM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/fft.hpp"
#include "fracspec/grid_function.hpp"
#include "fracspec/random.hpp"
#include "fracspec/specmodel.hpp"

namespace fracspec {

/// One realisation eta(1..n) with its provenance.
struct SamplePath {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string model_id;
  bool centered = false;
  double added_mean = 0.0;

  std::size_t n() const noexcept { return values.size(); }
};

/**
 * Exact sampler for a stationary Gaussian sequence with covariances
 * r(0..n-1), by circulant embedding.
 *
 * The Toeplitz covariance is embedded in a circulant of length m = 2^k >=
 * 2(n-1) with eigenvalues L = DFT(c). For real white noise w of length m,
 *
 *   y = IDFT(sqrt(L) * DFT(w)) / m
 *
 * has covariance exactly the circulant, so y(0..n-1) has the target law.
 * If the embedding has eigenvalues below -1e-8 * max(L) the length is doubled
 * (at most 6 times); remaining small negatives are clipped to zero.
 *
 * Construction is O(m log m); sampling reuses the plan and the eigenvalues,
 * so one sampler serves all replications and is safe to share across threads.
 */
class CirculantSampler {
 public:
  static constexpr int kMaxDoublings = 6;
  static constexpr double kNegativeTolerance = 1e-8;

  CirculantSampler(const SpectralModel& model, std::size_t n) : n_(n), model_id_(model.id()) {
    if (n < 1) throw domain_error("sample_path: n must be >= 1");
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = autocovariance(model, static_cast<std::int64_t>(k));
    if (n == 1) {
      root_r0_ = std::sqrt(r[0]);
      return;
    }
    std::size_t m = 2 * next_pow2(n - 1);
    double worst = 0.0;
    for (int attempt = 0; attempt <= kMaxDoublings; ++attempt, m *= 2) {
      std::vector<double> c(m, 0.0);
      for (std::size_t j = 0; j <= m / 2; ++j) {
        const double v = j < n ? r[j] : autocovariance(model, static_cast<std::int64_t>(j));
        c[j] = v;
        if (j > 0 && j < m / 2) c[m - j] = v;
      }
      auto dft = std::make_shared<RealDft>(m);
      const auto spec = dft->forward(c);
      double top = 0.0;
      worst = 0.0;
      for (const auto& z : spec) {
        top = std::max(top, z.real());
        worst = std::min(worst, z.real());
      }
      if (worst >= -kNegativeTolerance * top) {
        root_.resize(spec.size());
        for (std::size_t k = 0; k < spec.size(); ++k) {
          if (spec[k].real() < 0.0) clipped_ = true;
          root_[k] = std::sqrt(std::max(0.0, spec[k].real())) / static_cast<double>(m);
        }
        dft_ = std::move(dft);
        return;
      }
    }
    throw numerical_error("sample_path: circulant embedding of " + model_id_ + " for n = " +
                          std::to_string(n) + " has eigenvalue " + format_double(worst) +
                          " after " + std::to_string(kMaxDoublings) + " doublings");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return dft_ ? dft_->size() : 1; }
  bool clipped() const noexcept { return clipped_; }
  const std::string& model_id() const noexcept { return model_id_; }

  SamplePath sample(std::uint64_t seed, std::uint64_t stream = 0, double mean = 0.0) const {
    if (!std::isfinite(mean)) throw domain_error("sample_path: mean must be finite");
    SamplePath p;
    p.seed = seed;
    p.stream = stream;
    p.model_id = model_id_;
    p.added_mean = mean;
    NormalSource normal(seed, stream);
    if (!dft_) {
      p.values = {root_r0_ * normal() + mean};
      return p;
    }
    const std::size_t m = dft_->size();
    std::vector<double> w(m);
    normal.fill(w.begin(), w.end());
    std::vector<std::complex<double>> spec(dft_->spectrum_size());
    dft_->forward(w, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= root_[k];
    dft_->inverse(spec, w);
    p.values.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n_));
    if (mean != 0.0) {
      for (double& v : p.values) v += mean;
    }
    return p;
  }

 private:
  std::size_t n_;
  std::string model_id_;
  double root_r0_ = 0.0;
  std::shared_ptr<RealDft> dft_;
  std::vector<double> root_;  // sqrt(L_k) / m
  bool clipped_ = false;
};

inline SamplePath sample_path(const SpectralModel& model, std::size_t n, std::uint64_t seed,
                              double mean = 0.0, std::uint64_t stream = 0) {
  return CirculantSampler(model, n).sample(seed, stream, mean);
}

/// factor * z with z standard normal from (seed, stream).
inline std::vector<double> sample_limit_process(const LimitCovariance& cov, std::uint64_t seed,
                                                std::uint64_t stream = 0) {
  const auto k = static_cast<Eigen::Index>(cov.size());
  if (cov.factor.rows() != k || cov.factor.cols() != k) {
    throw domain_error("sample_limit_process: covariance has no factorization");
  }
  NormalSource normal(seed, stream);
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = normal();
  const Eigen::VectorXd x = cov.factor.triangularView<Eigen::Lower>() * z;
  return {x.data(), x.data() + k};
}

/// eta_k - n^-1 sum eta_j.
inline SamplePath center_sample(SamplePath path) {
  if (path.values.empty()) return path;
  double mean = 0.0;
  for (double v : path.values) mean += v;
  mean /= static_cast<double>(path.values.size());
  for (double& v : path.values) v -= mean;
  path.centered = true;
  return path;
}

inline void write_csv(std::ostream& os, const SamplePath& p,
                      const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << "# seed = " << p.seed << '\n';
  os << "# stream = " << p.stream << '\n';
  os << "# model = " << p.model_id << '\n';
  os << "# n = " << p.n() << '\n';
  os << "# centered = " << (p.centered ? 1 : 0) << '\n';
  os << "# added_mean = " << format_double(p.added_mean) << '\n';
  os << "eta\n";
  for (double v : p.values) os << format_double(v) << '\n';
}

/// Reads the `eta` CSV; provenance comments are restored when present.
inline SamplePath read_sample_path_csv(std::istream& is) {
  SamplePath p;
  std::string line;
  bool header = false;
  auto field = [](const std::string& l, const std::string& key, std::string& out) {
    const std::string prefix = "# " + key + " = ";
    if (l.rfind(prefix, 0) != 0) return false;
    out = l.substr(prefix.size());
    return true;
  };
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string v;
      if (field(line, "seed", v)) p.seed = std::stoull(v);
      else if (field(line, "stream", v)) p.stream = std::stoull(v);
      else if (field(line, "model", v)) p.model_id = v;
      else if (field(line, "centered", v)) p.centered = v == "1";
      else if (field(line, "added_mean", v)) p.added_mean = detail::parse_double(v);
      continue;
    }
    if (!header) {
      if (detail::trim(line) != "eta") throw io_error("sample path CSV: expected header 'eta'");
      header = true;
      continue;
    }
    const double v = detail::parse_double(line);
    if (!std::isfinite(v)) throw domain_error("sample path CSV: non-finite value");
    p.values.push_back(v);
  }
  if (!header) throw io_error("sample path CSV: missing header");
  if (p.values.empty()) throw domain_error("sample path CSV: no values");
  return p;
}

}  // namespace fracspec

#endif  // FRACSPEC_GSIM_HPP
