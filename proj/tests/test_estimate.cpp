#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fracspec/estimate.hpp"
#include "fracspec/stats.hpp"

using fracspec::GridFunction;
using fracspec::Periodogram;
using fracspec::SpectralModel;
using fracspec::two_pi;

namespace {

const double kPi = M_PI;

std::vector<double> random_eta(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Direct evaluation of the trigonometric sum.
double periodogram_oracle(const std::vector<double>& eta, double lambda) {
  std::complex<double> s = 0.0;
  for (std::size_t k = 1; k <= eta.size(); ++k) {
    s += std::polar(1.0, static_cast<double>(k) * lambda) * eta[k - 1];
  }
  return std::norm(s) / (two_pi * static_cast<double>(eta.size()));
}

double trapezoid(const GridFunction& g) {
  double s = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) s += 0.5 * g.spacing() * (g[i - 1] + g[i]);
  return s;
}

double mean_square(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(Periodogram, SingleObservationIsFlat) {
  const auto j = fracspec::periodogram(std::vector<double>{1.7}, 129);
  for (std::size_t i = 0; i < j.grid_fn.size(); ++i) {
    EXPECT_NEAR(j.grid_fn[i], 1.7 * 1.7 / two_pi, 1e-15);
  }
}

TEST(Periodogram, TwoOnesVanishAtPi) {
  const auto j = fracspec::periodogram(std::vector<double>{1.0, 1.0}, 4097);
  EXPECT_NEAR(j.grid_fn[2048], 0.0, 1e-15);
  EXPECT_NEAR(j.grid_fn[0], 4.0 / (2.0 * two_pi), 1e-15);
}

TEST(Periodogram, MatchesDirectSum) {
  // includes n larger than the grid period, which exercises the folding
  for (auto [n, points] : {std::pair<std::size_t, std::size_t>{64, 1000}, {5000, 1025}, {7, 3}}) {
    const auto eta = random_eta(n, static_cast<unsigned>(n));
    const auto j = fracspec::periodogram(eta, points);
    for (std::size_t i = 0; i < points; i += std::max<std::size_t>(1, points / 37)) {
      EXPECT_NEAR(j.grid_fn[i], periodogram_oracle(eta, j.grid_fn.x(i)), 1e-10) << n << " " << i;
    }
  }
}

TEST(Periodogram, ParsevalNonnegativeAndEven) {
  const auto eta = random_eta(64, 3);
  const auto j = fracspec::periodogram(eta, 4096);
  EXPECT_NEAR(trapezoid(j.grid_fn), mean_square(eta), 1e-8);
  const auto& g = j.grid_fn;
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_GE(g[i], 0.0);
    EXPECT_NEAR(g[i], g[g.size() - 1 - i], 1e-10);
  }
  EXPECT_TRUE(g.periodic());
}

TEST(EmpiricalSpectralFunction, Properties) {
  const auto eta = random_eta(200, 4);
  const auto j = fracspec::periodogram(eta, 2049);
  const auto f = fracspec::empirical_spectral_function(j);
  EXPECT_EQ(f[0], 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GE(f[i], f[i - 1]);
  EXPECT_NEAR(f.back(), mean_square(eta), 1e-10);
}

TEST(FracEstimate, AlphaZeroIsEmpiricalSpectralFunction) {
  for (std::size_t points : {257u, 4097u}) {
    const auto j = fracspec::periodogram(random_eta(64, 5), points);
    const auto e = fracspec::frac_estimate(j, 0.0);
    const auto f = fracspec::empirical_spectral_function(j);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(e.grid_fn[i], f[i], 1e-12);
  }
}

TEST(FracEstimate, SingleObservationClosedForm) {
  const double a = 1.3;
  const double alpha = 0.3;
  const auto e = fracspec::frac_estimate(fracspec::periodogram(std::vector<double>{a}, 1025), alpha);
  EXPECT_EQ(e.grid_fn[0], 0.0);
  for (std::size_t i = 1; i < e.grid_fn.size(); i += 97) {
    const double x = e.grid_fn.x(i);
    EXPECT_NEAR(e.grid_fn[i], a * a / two_pi * std::pow(x, 1 - alpha) / std::tgamma(2 - alpha), 1e-12);
  }
  EXPECT_THROW(fracspec::frac_estimate(fracspec::periodogram(std::vector<double>{a}, 9), 0.5),
               fracspec::domain_error);
}

TEST(FracEstimate, AgreesWithSixteenTimesFinerGrid) {
  const auto eta = random_eta(64, 6);
  const std::size_t points = fracspec::default_grid_points(64);
  const auto coarse = fracspec::frac_estimate(fracspec::periodogram(eta, points), 0.25);
  const std::size_t fine_points = 16 * (points - 1) + 1;
  const auto fine = fracspec::frac_estimate(fracspec::periodogram(eta, fine_points), 0.25);
  double err = 0.0;
  for (std::size_t i = 0; i < points; ++i) err = std::max(err, std::abs(coarse.grid_fn[i] - fine.grid_fn[16 * i]));
  EXPECT_LE(err, 1e-5);
}

TEST(FracEstimate, NonnegativeAndStartsAtZero) {
  const auto e = fracspec::frac_estimate(fracspec::periodogram(random_eta(300, 7), 2049), 0.4);
  EXPECT_EQ(e.grid_fn[0], 0.0);
  for (std::size_t i = 0; i < e.grid_fn.size(); ++i) EXPECT_GE(e.grid_fn[i], 0.0);
}

TEST(Estimators, ScaleWithDataSquared) {
  auto eta = random_eta(128, 8);
  const auto j1 = fracspec::periodogram(eta, 1025);
  const double s = 1.7;
  for (double& v : eta) v *= s;
  const auto j2 = fracspec::periodogram(eta, 1025);
  const auto e1 = fracspec::frac_estimate(j1, 0.2);
  const auto e2 = fracspec::frac_estimate(j2, 0.2);
  for (std::size_t i = 0; i < 1025; ++i) {
    EXPECT_NEAR(j2.grid_fn[i], s * s * j1.grid_fn[i], 1e-12 * (1 + j2.grid_fn[i]));
    EXPECT_NEAR(e2.grid_fn[i], s * s * e1.grid_fn[i], 1e-12 * (1 + e2.grid_fn[i]));
  }
  const double v1 = fracspec::plugin_variance(j1, 0.2, 2.0);
  const double v2 = fracspec::plugin_variance(j2, 0.2, 2.0);
  EXPECT_NEAR(v2, std::pow(s, 4) * v1, 1e-11 * v2);
}

TEST(PluginVariance, ZeroAndScaling) {
  const Periodogram zero{10, GridFunction(std::vector<double>(65, 0.0), true)};
  EXPECT_EQ(fracspec::plugin_variance(zero, 0.25, kPi), 0.0);
  const auto j = fracspec::periodogram(random_eta(50, 9), 513);
  EXPECT_EQ(fracspec::plugin_variance(j, 0.25, kPi, 1.0), 2.0 * fracspec::plugin_variance(j, 0.25, kPi, 0.5));
  EXPECT_EQ(fracspec::plugin_variance(j, 0.25, kPi), fracspec::plugin_variance(j, 0.25, kPi, 0.5));
  EXPECT_THROW(fracspec::plugin_variance(j, 0.0, kPi), fracspec::domain_error);
  EXPECT_THROW(fracspec::plugin_variance(j, 0.25, 0.0), fracspec::domain_error);
  EXPECT_THROW(fracspec::plugin_variance(j, 0.25, kPi, 0.0), fracspec::domain_error);
}

TEST(PluginVariance, MonteCarloMatchesLimitVariance) {
  const auto m = SpectralModel::constant(1.0 / two_pi);
  const std::size_t n = 4096;
  const fracspec::CirculantSampler sampler(m, n);
  const fracspec::PeriodogramEngine pgram(fracspec::default_grid_points(n));
  double acc = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    acc += fracspec::plugin_variance(pgram(sampler.sample(31, r).values), 0.25, kPi);
  }
  const double sigma2 = fracspec::limit_covariance_entry(m, 0.25, kPi, kPi);
  EXPECT_NEAR(sigma2, 0.7514, 1e-4);
  EXPECT_NEAR(acc / 200 / sigma2, 1.0, 0.15);
}

TEST(FracEstimate, MeanApproachesFejerExpectation) {
  const auto m = SpectralModel::ar1(0.5);
  const double alpha = 0.25;
  for (std::size_t n : {256u, 1024u}) {
    const std::size_t points = fracspec::default_grid_points(n);
    const fracspec::CirculantSampler sampler(m, n);
    const fracspec::PeriodogramEngine pgram(points);
    const fracspec::FracIntegrator integ(points, 1 - alpha);
    const auto expected =
        integ.apply(fracspec::expected_periodogram(m, static_cast<std::int64_t>(n), points));
    const std::vector<std::size_t> probes = {points / 8, points / 4, points / 2, 3 * points / 4, points - 1};
    std::vector<std::vector<double>> x(probes.size());
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto e = fracspec::frac_estimate(pgram(sampler.sample(12, r).values), alpha, integ);
      for (std::size_t p = 0; p < probes.size(); ++p) x[p].push_back(e.grid_fn[probes[p]]);
    }
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double se = std::sqrt(fracspec::stats::variance(x[p]) / 200);
      EXPECT_NEAR(fracspec::stats::mean(x[p]), expected[probes[p]], 3 * se) << n << " " << p;
    }
  }
}

TEST(DefaultGrid, SizeRule) {
  EXPECT_EQ(fracspec::default_grid_points(1), 4097u);
  EXPECT_EQ(fracspec::default_grid_points(2048), 8193u);
  EXPECT_EQ(fracspec::default_grid_points(1u << 20), 65537u);
}
