#ifndef FRACSPEC_VERIFY_HPP
#define FRACSPEC_VERIFY_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fracspec/errors.hpp"
#include "fracspec/estimate.hpp"
#include "fracspec/fracops.hpp"
#include "fracspec/grid_function.hpp"
#include "fracspec/gsim.hpp"
#include "fracspec/specmodel.hpp"
#include "fracspec/stats.hpp"

namespace fracspec {

// ---------------------------------------------------------------------------
// Deterministic references for the centred and deviation processes
// ---------------------------------------------------------------------------

/// E F_{alpha,n} = I^(1-alpha)[Phi_n * f] and F^(alpha) on one grid.
struct EstimatorReference {
  double alpha = 0.0;
  std::size_t n = 0;
  GridFunction mean;    // E F_{alpha,n}
  GridFunction target;  // F^(alpha)
};

inline EstimatorReference estimator_reference(const SpectralModel& model, double alpha,
                                              std::size_t n, std::size_t num_points) {
  check_alpha(alpha, true);
  const auto ej = expected_periodogram(model, static_cast<std::int64_t>(n), num_points);
  return {alpha, n, FracIntegrator(num_points, 1.0 - alpha).apply(ej),
          frac_spectral_derivative_grid(model, alpha, num_points)};
}

namespace detail {

inline GridFunction scaled_difference(const FracEstimate& e, const GridFunction& ref) {
  if (!e.grid_fn.same_grid(ref)) throw domain_error("grid mismatch between estimate and reference");
  const double s = std::sqrt(static_cast<double>(e.n));
  std::vector<double> v(ref.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * (e.grid_fn[i] - ref[i]);
  return GridFunction(std::move(v));
}

}  // namespace detail

/// zeta_n = sqrt(n) (F_{alpha,n} - E F_{alpha,n}).
inline GridFunction centered_process(const FracEstimate& e, const EstimatorReference& ref) {
  if (e.n != ref.n || e.alpha != ref.alpha) throw domain_error("centered_process: reference mismatch");
  return detail::scaled_difference(e, ref.mean);
}

inline GridFunction centered_process(const FracEstimate& e, const SpectralModel& model) {
  return centered_process(e, estimator_reference(model, e.alpha, e.n, e.grid_fn.size()));
}

/// theta_n = sqrt(n) (F_{alpha,n} - F^(alpha)).
inline GridFunction deviation_process(const FracEstimate& e, const EstimatorReference& ref) {
  if (e.n != ref.n || e.alpha != ref.alpha) throw domain_error("deviation_process: reference mismatch");
  return detail::scaled_difference(e, ref.target);
}

inline GridFunction deviation_process(const FracEstimate& e, const SpectralModel& model) {
  return deviation_process(e, estimator_reference(model, e.alpha, e.n, e.grid_fn.size()));
}

// ---------------------------------------------------------------------------
// Parallel execution with deterministic aggregation
// ---------------------------------------------------------------------------

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers stop.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

/// Re-raises the active exception with the replication's seed and stream prepended.
[[noreturn]] inline void rethrow_with_replication(std::uint64_t seed, std::uint64_t stream) {
  const std::string where =
      "replication seed=" + std::to_string(seed) + " stream=" + std::to_string(stream) + ": ";
  try {
    throw;
  } catch (const domain_error& e) {
    throw domain_error(where + e.what());
  } catch (const io_error& e) {
    throw io_error(where + e.what());
  } catch (const std::exception& e) {
    throw numerical_error(where + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Limit-process sup quantiles and confidence bands
// ---------------------------------------------------------------------------

/// Stream offset reserved for limit-process draws, disjoint from path streams.
inline constexpr std::uint64_t kLimitStreamBase = std::uint64_t{1} << 62;

/// 2 pi i / K, i = 1..K.
inline std::vector<double> uniform_probes(std::size_t k) {
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = two_pi * static_cast<double>(i + 1) / static_cast<double>(k);
  return p;
}

/// max_i |zeta_inf(l_i)| for `draws` independent limit-process draws, in draw order.
inline std::vector<double> limit_sup_draws(const LimitCovariance& cov, std::size_t draws,
                                           std::uint64_t seed) {
  std::vector<double> sups(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto x = sample_limit_process(cov, seed, kLimitStreamBase + d);
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    sups[d] = m;
  }
  return sups;
}

/// u_0(delta): empirical (1 - delta) quantile of the limit-process sup.
inline double sup_quantile(const std::vector<double>& sups, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("delta must lie in (0, 1)");
  return stats::quantile(sups, 1.0 - delta);
}

struct ConfidenceBand {
  double u0 = 0.0;
  double coverage = 0.0;
  double half_width = 0.0;  // u0 / sqrt(n)
  std::size_t covered = 0;
  std::size_t replications = 0;
  bool clip_applied = false;
};

// ---------------------------------------------------------------------------
// Monte Carlo harness
// ---------------------------------------------------------------------------

struct McConfig {
  SpectralModel model = SpectralModel::constant(1.0 / two_pi);
  double alpha = 0.25;
  std::vector<std::size_t> n_list = {1024};
  std::size_t replications = 100;
  std::vector<double> probe_lambdas = {std::numbers::pi / 2, std::numbers::pi};
  std::uint64_t seed = 1;
  std::vector<double> tail_u_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  std::optional<double> holder_delta;  // default 1/2 - alpha - 0.05
  /// Hölder h-grid as multiples of 2 pi: 2^-7 .. 2^-3.
  std::vector<double> holder_h = {1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  double delta_confidence = 0.05;
  bool confidence = true;
  std::size_t calibration_draws = 5000;
  std::size_t confidence_probes = 64;
  std::size_t grid_points = 0;  // 0: default_grid_points(n)
  unsigned threads = 0;         // 0: hardware concurrency

  double resolved_holder_delta() const { return holder_delta.value_or(0.5 - alpha - 0.05); }
  std::size_t grid_for(std::size_t n) const { return grid_points ? grid_points : default_grid_points(n); }

  /// Throws config_error naming the offending key.
  void validate() const {
    if (!(alpha > 0.0 && alpha < 0.5)) {
      throw config_error("alpha", "must lie in the well-posed range (0, 1/2)");
    }
    if (n_list.empty()) throw config_error("n_list", "must list at least one sample size");
    for (auto n : n_list) {
      if (n < 1) throw config_error("n_list", "sample sizes must be >= 1");
    }
    if (replications < 2) throw config_error("replications", "must be >= 2");
    if (probe_lambdas.empty()) throw config_error("probe_lambdas", "must not be empty");
    for (std::size_t i = 0; i < probe_lambdas.size(); ++i) {
      const double p = probe_lambdas[i];
      if (!(p > 0.0 && p <= two_pi * (1 + 1e-15))) {
        throw config_error("probe_lambdas", "probes must lie in (0, 2pi]");
      }
      if (i > 0 && !(p > probe_lambdas[i - 1])) {
        throw config_error("probe_lambdas", "probes must be strictly increasing");
      }
    }
    if (tail_u_grid.empty()) throw config_error("tail_u_grid", "must not be empty");
    for (std::size_t i = 0; i < tail_u_grid.size(); ++i) {
      if (!(tail_u_grid[i] > 0.0)) throw config_error("tail_u_grid", "values must be positive");
      if (i > 0 && !(tail_u_grid[i] > tail_u_grid[i - 1])) {
        throw config_error("tail_u_grid", "values must be strictly increasing");
      }
    }
    const double d = resolved_holder_delta();
    if (!(d > 0.0 && d < 0.5 - alpha)) {
      throw config_error("holder_delta", "must lie in (0, 1/2 - alpha) = (0, " +
                                             format_double(0.5 - alpha) + ")");
    }
    if (holder_h.empty()) throw config_error("holder_h", "must not be empty");
    for (double h : holder_h) {
      if (!(h > 0.0 && h <= 1.0)) throw config_error("holder_h", "values must lie in (0, 1]");
    }
    if (!(delta_confidence > 0.0 && delta_confidence < 1.0)) {
      throw config_error("delta_confidence", "must lie in (0, 1)");
    }
    if (confidence && calibration_draws < 1000) {
      throw config_error("calibration_draws", "must be >= 1000");
    }
    if (confidence && confidence_probes < 2) throw config_error("confidence_probes", "must be >= 2");
    if (grid_points != 0 && grid_points < 3) throw config_error("grid_points", "must be 0 or >= 3");
    for (auto n : n_list) {
      const double spacing = GridFunction::spacing_for(grid_for(n));
      for (double h : holder_h) {
        if (h * two_pi < spacing) throw config_error("holder_h", "finer than the evaluation grid");
      }
    }
  }
};

struct ProbeRow {
  std::size_t n = 0;
  double lambda = 0.0;
  double mean_estimate = 0.0;  // pooled mean of F_{alpha,n}(lambda)
  double target = 0.0;         // F^(alpha)(lambda)
  double bias = 0.0;           // mean_estimate - target
  double zeta_mean = 0.0;
  double zeta_var = 0.0;
  double theta_diag = 0.0;     // Theta_alpha(lambda, lambda)
  double ks = 0.0;             // zeta / sqrt(Theta) against N(0, 1)
  double p = 0.0;
  double ks_matched = 0.0;     // zeta / sd_emp against N(0, 1)
  double p_matched = 0.0;
  double tau_var = 0.0;        // Var of sqrt(n)(F_n - E F_n)
  double beta_sq = 0.0;        // beta^2(lambda)
  std::vector<double> lp;      // ||zeta||_p for p = 2, 4, 6, 8
};

struct CovRow {
  std::size_t n = 0;
  double lambda = 0.0;
  double mu = 0.0;
  double emp = 0.0;
  double theory = 0.0;
  double rel_err = 0.0;
};

struct TailRow {
  std::size_t n = 0;
  double u = 0.0;
  double w0 = 0.0;  // P(sup |zeta_n| > u)
  double w = 0.0;   // P(sup |theta_n| > u)
  std::size_t count0 = 0;
  std::size_t count = 0;
  bool censored0 = false;  // count below 2
  bool censored = false;
};

struct TailFit {
  std::size_t n = 0;
  std::size_t points = 0;          // u values with w0 in [0.01, 0.5], uncensored
  double intercept = 0.0;          // log w0 ~ intercept + slope u
  double slope = 0.0;
  std::vector<double> quadratic;   // log w0 ~ c0 + c1 u + c2 u^2 (>= 3 points)
  std::size_t checked = 0;         // larger uncensored u checked against the envelope
  double worst_ratio = 0.0;        // max w0 / exp(intercept + slope u) over the checked u
  bool envelope_holds = false;     // slope < 0 and worst_ratio <= 2
};

struct HolderRow {
  std::size_t n = 0;
  double h = 0.0;
  double q95 = 0.0;
};

struct FejerRow {
  std::size_t n = 0;
  double sup_error = 0.0;  // sup |Phi_n * f - f|
  double omega = 0.0;      // omega(f, 1/n)
  double bound = 0.0;      // omega |ln omega|
};

struct ConfidenceRow {
  std::size_t n = 0;
  double delta = 0.0;
  double u0 = 0.0;
  double coverage = 0.0;
};

struct NSummary {
  std::size_t n = 0;
  std::size_t grid_points = 0;
  double sup_bias = 0.0;       // sup over grid |mean F_{alpha,n} - F^(alpha)|
  double holder_spread = 0.0;  // max / min of the q95 ratios
};

struct McReport {
  McConfig config;
  double holder_delta = 0.0;
  std::vector<NSummary> summaries;
  std::vector<ProbeRow> probes;
  std::vector<CovRow> cov;
  std::vector<TailRow> tails;
  std::vector<TailFit> tail_fits;
  std::vector<HolderRow> holder;
  std::vector<FejerRow> fejer;
  std::vector<ConfidenceRow> confidence;
  bool confidence_clip_applied = false;
  unsigned threads = 1;
  double runtime_seconds = 0.0;
};

/**
 * Fejér approximation error sup_grid |Phi_n * f - f| next to the modulus
 * bound omega(f, 1/n) |ln omega(f, 1/n)| (unit constant), omega measured on a
 * grid with four cells per 1/n.
 */
inline FejerRow fejer_bias(const SpectralModel& model, std::size_t n, std::size_t points) {
  const auto ej = expected_periodogram(model, static_cast<std::int64_t>(n), points);
  const auto f = GridFunction::sample(points, [&](double x) { return model.density(x); }, true);
  FejerRow row;
  row.n = n;
  row.sup_error = (ej - f).sup_norm();
  const double h = 1.0 / static_cast<double>(n);
  const auto cells = static_cast<std::size_t>(std::ceil(4.0 * two_pi / h));
  const auto fine = GridFunction::sample(cells + 1, [&](double x) { return model.density(x); }, true);
  row.omega = modulus_of_continuity(fine, h);
  row.bound = row.omega > 0.0 ? row.omega * std::abs(std::log(row.omega)) : 0.0;
  return row;
}

namespace detail {

struct Replication {
  std::vector<double> estimate;       // F_{alpha,n} on the grid
  std::vector<double> zeta;           // at probes
  std::vector<double> tau;            // at probes
  double sup_zeta = 0.0;
  double sup_theta = 0.0;
  std::vector<double> holder_ratio;   // per h
};

inline double sup_abs(const GridFunction& g) { return g.sup_norm(); }

inline TailFit fit_tail(std::size_t n, const std::vector<TailRow>& rows) {
  TailFit fit;
  fit.n = n;
  std::vector<double> us;
  std::vector<double> logs;
  double last_u = -1.0;
  for (const auto& r : rows) {
    if (!r.censored0 && r.w0 >= 0.01 && r.w0 <= 0.5) {
      us.push_back(r.u);
      logs.push_back(std::log(r.w0));
      last_u = r.u;
    }
  }
  fit.points = us.size();
  if (us.size() < 2) return fit;
  const auto lin = stats::polyfit(us, logs, 1);
  fit.intercept = lin[0];
  fit.slope = lin[1];
  if (us.size() >= 3) fit.quadratic = stats::polyfit(us, logs, 2);
  for (const auto& r : rows) {
    if (r.u <= last_u || r.censored0) continue;
    ++fit.checked;
    fit.worst_ratio = std::max(fit.worst_ratio, r.w0 / std::exp(fit.intercept + fit.slope * r.u));
  }
  fit.envelope_holds = fit.slope < 0.0 && fit.worst_ratio <= 2.0;
  return fit;
}

}  // namespace detail

/**
 * For each n: R replications of path -> periodogram -> F_{alpha,n} -> zeta_n,
 * theta_n (plus the alpha = 0 process tau_n from the same paths), aggregated in
 * replication order. Replication r at the i-th sample size uses
 * (seed, stream = i * 2^40 + r); limit-process draws use streams from 2^62.
 */
inline McReport run_monte_carlo(const McConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  McReport report;
  report.config = config;
  report.holder_delta = config.resolved_holder_delta();
  report.threads = resolve_threads(config.threads);
  const auto& model = config.model;
  const double alpha = config.alpha;
  const std::size_t reps = config.replications;
  const std::size_t k = config.probe_lambdas.size();

  const auto theta = limit_covariance(model, alpha, config.probe_lambdas);

  std::vector<double> sups;
  double u0 = 0.0;
  if (config.confidence) {
    const auto band_cov = limit_covariance(model, alpha, uniform_probes(config.confidence_probes));
    report.confidence_clip_applied = band_cov.clip_applied;
    sups = limit_sup_draws(band_cov, config.calibration_draws, config.seed);
    u0 = sup_quantile(sups, config.delta_confidence);
  }

  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    const std::size_t n = config.n_list[ni];
    const std::size_t points = config.grid_for(n);
    const auto ref = estimator_reference(model, alpha, n, points);
    const auto tau_ref = estimator_reference(model, 0.0, n, points);
    const CirculantSampler sampler(model, n);
    const PeriodogramEngine pgram(points);
    const FracIntegrator integ(points, 1.0 - alpha);
    const FracIntegrator integ0(points, 1.0);

    std::vector<detail::Replication> results(reps);
    parallel_for(reps, report.threads, [&](std::size_t r) {
      const std::uint64_t stream = (static_cast<std::uint64_t>(ni) << 40) + r;
      try {
        const auto path = sampler.sample(config.seed, stream);
        const auto j = pgram(path.values);
        const auto est = frac_estimate(j, alpha, integ);
        const auto est0 = frac_estimate(j, 0.0, integ0);
        const auto zeta = centered_process(est, ref);
        const auto th = deviation_process(est, ref);
        const auto tau = centered_process(est0, tau_ref);
        detail::Replication out;
        out.estimate = est.grid_fn.vector();
        for (double p : config.probe_lambdas) {
          out.zeta.push_back(zeta.at(p));
          out.tau.push_back(tau.at(p));
        }
        out.sup_zeta = detail::sup_abs(zeta);
        out.sup_theta = detail::sup_abs(th);
        for (double h : config.holder_h) {
          const double step = h * two_pi;
          out.holder_ratio.push_back(modulus_of_continuity(zeta, step) /
                                     std::pow(step, report.holder_delta));
        }
        results[r] = std::move(out);
      } catch (...) {
        detail::rethrow_with_replication(config.seed, stream);
      }
    });

    // Aggregation, single-threaded in replication order.
    NSummary summary;
    summary.n = n;
    summary.grid_points = points;
    std::vector<double> mean_est(points, 0.0);
    for (const auto& res : results) {
      for (std::size_t i = 0; i < points; ++i) mean_est[i] += res.estimate[i];
    }
    for (double& v : mean_est) v /= static_cast<double>(reps);
    for (std::size_t i = 0; i < points; ++i) {
      summary.sup_bias = std::max(summary.sup_bias, std::abs(mean_est[i] - ref.target[i]));
    }
    const GridFunction mean_fn(mean_est);

    std::vector<std::vector<double>> zeta(k, std::vector<double>(reps));
    std::vector<std::vector<double>> tau(k, std::vector<double>(reps));
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t i = 0; i < k; ++i) {
        zeta[i][r] = results[r].zeta[i];
        tau[i][r] = results[r].tau[i];
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double lambda = config.probe_lambdas[i];
      ProbeRow row;
      row.n = n;
      row.lambda = lambda;
      row.mean_estimate = mean_fn.at(lambda);
      row.target = ref.target.at(lambda);
      row.bias = row.mean_estimate - row.target;
      row.zeta_mean = stats::mean(zeta[i]);
      row.zeta_var = stats::variance(zeta[i]);
      row.theta_diag = theta.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      std::vector<double> z(reps);
      for (std::size_t r = 0; r < reps; ++r) z[r] = zeta[i][r] / std::sqrt(row.theta_diag);
      row.ks = stats::ks_statistic_normal(z);
      row.p = stats::ks_pvalue(row.ks, reps);
      const double sd = std::sqrt(row.zeta_var);
      for (std::size_t r = 0; r < reps; ++r) z[r] = (zeta[i][r] - row.zeta_mean) / sd;
      row.ks_matched = stats::ks_statistic_normal(z);
      row.p_matched = stats::ks_pvalue(row.ks_matched, reps);
      row.tau_var = stats::variance(tau[i]);
      row.beta_sq = beta_squared(model, lambda);
      for (double p : {2.0, 4.0, 6.0, 8.0}) row.lp.push_back(stats::lp_norm(zeta[i], p));
      report.probes.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) {
        CovRow row;
        row.n = n;
        row.lambda = config.probe_lambdas[i];
        row.mu = config.probe_lambdas[j];
        row.emp = stats::covariance(zeta[i], zeta[j]);
        row.theory = theta.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        row.rel_err = std::abs(row.emp - row.theory) / std::abs(row.theory);
        report.cov.push_back(row);
      }
    }

    std::vector<TailRow> tails;
    for (double u : config.tail_u_grid) {
      TailRow row;
      row.n = n;
      row.u = u;
      for (const auto& res : results) {
        row.count0 += res.sup_zeta > u ? 1 : 0;
        row.count += res.sup_theta > u ? 1 : 0;
      }
      row.w0 = static_cast<double>(row.count0) / static_cast<double>(reps);
      row.w = static_cast<double>(row.count) / static_cast<double>(reps);
      row.censored0 = row.count0 < 2;
      row.censored = row.count < 2;
      tails.push_back(row);
    }
    report.tail_fits.push_back(detail::fit_tail(n, tails));
    report.tails.insert(report.tails.end(), tails.begin(), tails.end());

    double qmin = std::numeric_limits<double>::infinity();
    double qmax = 0.0;
    for (std::size_t hi = 0; hi < config.holder_h.size(); ++hi) {
      std::vector<double> ratios(reps);
      for (std::size_t r = 0; r < reps; ++r) ratios[r] = results[r].holder_ratio[hi];
      HolderRow row{n, config.holder_h[hi] * two_pi, stats::quantile(ratios, 0.95)};
      qmin = std::min(qmin, row.q95);
      qmax = std::max(qmax, row.q95);
      report.holder.push_back(row);
    }
    summary.holder_spread = qmin > 0.0 ? qmax / qmin : std::numeric_limits<double>::infinity();

    report.fejer.push_back(fejer_bias(model, n, points));

    if (config.confidence) {
      std::size_t covered = 0;
      for (const auto& res : results) covered += res.sup_theta <= u0 ? 1 : 0;
      report.confidence.push_back(
          {n, config.delta_confidence, u0, static_cast<double>(covered) / static_cast<double>(reps)});
    }
    report.summaries.push_back(summary);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/**
 * Remark-style confidence band F_{alpha,n} +- u_0(delta) / sqrt(n): u_0 from
 * `calibration_draws` limit-process sups over `probe_points` uniform probes;
 * coverage over `replications` fresh sample paths with the grid sup of
 * |F_{alpha,n} - F^(alpha)|.
 */
inline ConfidenceBand confidence_band(const SpectralModel& model, double alpha, std::size_t n,
                                      double delta, std::size_t calibration_draws,
                                      std::uint64_t seed, std::size_t replications = 400,
                                      std::size_t probe_points = 64, unsigned threads = 0,
                                      std::size_t grid_points = 0) {
  check_alpha(alpha, false);
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("confidence_band: delta must lie in (0, 1)");
  if (calibration_draws < 1000) throw domain_error("confidence_band: calibration_draws must be >= 1000");
  if (n < 1 || replications < 1) throw domain_error("confidence_band: n and replications must be >= 1");
  const auto cov = limit_covariance(model, alpha, uniform_probes(probe_points));
  ConfidenceBand band;
  band.clip_applied = cov.clip_applied;
  band.u0 = sup_quantile(limit_sup_draws(cov, calibration_draws, seed), delta);
  band.half_width = band.u0 / std::sqrt(static_cast<double>(n));
  band.replications = replications;
  const std::size_t points = grid_points ? grid_points : default_grid_points(n);
  const auto target = frac_spectral_derivative_grid(model, alpha, points);
  const CirculantSampler sampler(model, n);
  const PeriodogramEngine pgram(points);
  const FracIntegrator integ(points, 1.0 - alpha);
  std::vector<char> inside(replications, 0);
  parallel_for(replications, resolve_threads(threads), [&](std::size_t r) {
    try {
      const auto est = frac_estimate(pgram(sampler.sample(seed, r).values), alpha, integ);
      inside[r] = (est.grid_fn - target).sup_norm() <= band.half_width ? 1 : 0;
    } catch (...) {
      detail::rethrow_with_replication(seed, r);
    }
  });
  for (char c : inside) band.covered += static_cast<std::size_t>(c);
  band.coverage = static_cast<double>(band.covered) / static_cast<double>(replications);
  return band;
}

}  // namespace fracspec

#endif  // FRACSPEC_VERIFY_HPP
