#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fracspec/gsim.hpp"
#include "fracspec/random.hpp"
#include "fracspec/stats.hpp"

using fracspec::CirculantSampler;
using fracspec::Philox4x32;
using fracspec::SpectralModel;
using fracspec::two_pi;

namespace {

const double kPi = M_PI;

}  // namespace

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                 {0xffffffff, 0xffffffff}),
            (Philox4x32::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 {0xa4093822, 0x299f31d0}),
            (Philox4x32::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, SeedingLayout) {
  Philox4x32 e(0x299f31d0a4093822ull, 0x0370734413198a2eull);
  // block 0 of this stream is counter (0, 0, 0x13198a2e, 0x03707344)
  const auto expect = Philox4x32::generate({0, 0, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  for (auto w : expect) EXPECT_EQ(e(), w);
  const auto next = Philox4x32::generate({1, 0, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(e(), next[0]);
}

TEST(Philox, StreamsDiffer) {
  Philox4x32 a(5, 0);
  Philox4x32 b(5, 1);
  Philox4x32 c(6, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    same_ab += x == b() ? 1 : 0;
    same_ac += x == c() ? 1 : 0;
  }
  EXPECT_LT(same_ab, 2);
  EXPECT_LT(same_ac, 2);
}

TEST(SamplePath, DeterministicForSameSeed) {
  const auto m = SpectralModel::ar1(0.5);
  const auto a = fracspec::sample_path(m, 333, 42);
  const auto b = fracspec::sample_path(m, 333, 42);
  const auto c = fracspec::sample_path(m, 333, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(a.model_id, m.id());
  EXPECT_FALSE(a.centered);
  EXPECT_EQ(a.n(), 333u);
}

TEST(SamplePath, SingleObservation) {
  const auto p = fracspec::sample_path(SpectralModel::constant(2.0 / two_pi), 1, 3, 1.5);
  ASSERT_EQ(p.n(), 1u);
  EXPECT_TRUE(std::isfinite(p.values[0]));
  EXPECT_THROW(fracspec::sample_path(SpectralModel::ar1(0.1), 0, 1), fracspec::domain_error);
}

TEST(SamplePath, WhiteNoiseHasUnitVariance) {
  const auto m = SpectralModel::constant(1.0 / two_pi);
  const CirculantSampler s(m, 1024);
  double sum = 0.0;
  double sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    for (double v : s.sample(2024, r).values) {
      sum += v;
      sq += v * v;
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(SamplePath, Ar1LagOneCovariance) {
  const auto m = SpectralModel::ar1(0.5);
  const CirculantSampler s(m, 4096);
  EXPECT_FALSE(s.clipped());
  double acc = 0.0;
  std::size_t count = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto p = s.sample(99, r);
    for (std::size_t k = 0; k + 1 < p.n(); ++k) {
      acc += p.values[k] * p.values[k + 1];
      ++count;
    }
  }
  EXPECT_NEAR(acc / count, 0.5, 0.03);
}

TEST(SamplePath, CirculantEmbeddingIsExactInLaw) {
  const auto m = SpectralModel::ar1(0.5);
  const std::size_t n = 64;
  const std::size_t reps = 20000;
  const CirculantSampler s(m, n);
  std::vector<std::vector<double>> paths(reps);
  for (std::size_t r = 0; r < reps; ++r) paths[r] = s.sample(7, r).values;
  for (std::size_t i = 0; i < n; i += 3) {
    for (std::size_t j = i; j < n; j += 5) {
      double c = 0.0;
      for (const auto& p : paths) c += p[i] * p[j];
      c /= reps;
      const double r = fracspec::autocovariance(m, static_cast<std::int64_t>(j - i));
      // Var(x_i x_j) = r(0)^2 + r(i-j)^2 for a centred Gaussian pair
      const double se = std::sqrt((1.0 + r * r) / reps);
      EXPECT_NEAR(c, r, 5 * se) << i << "," << j;
    }
  }
  // Gaussianity of five coordinates against the matched-variance normal.
  for (std::size_t coord : {0u, 11u, 31u, 40u, 63u}) {
    std::vector<double> x(reps);
    for (std::size_t r = 0; r < reps; ++r) x[r] = paths[r][coord];
    const double sd = std::sqrt(fracspec::stats::variance(x));
    for (double& v : x) v /= sd;
    const double d = fracspec::stats::ks_statistic_normal(x);
    EXPECT_GE(fracspec::stats::ks_pvalue(d, reps), 0.01) << coord;
  }
}

TEST(SamplePath, CustomGridModel) {
  const auto ar = SpectralModel::ar1(-0.3);
  const auto m = SpectralModel::custom(
      fracspec::GridFunction::sample(257, [&](double x) { return ar.density(x); }, true), "t");
  const CirculantSampler s(m, 500);
  EXPECT_EQ(s.sample(1, 2).n(), 500u);
}

TEST(CenterSample, ZeroMeanAndIdempotent) {
  const auto p = fracspec::sample_path(SpectralModel::ar1(0.4), 257, 5, 3.0);
  const auto c = fracspec::center_sample(p);
  EXPECT_TRUE(c.centered);
  EXPECT_NEAR(fracspec::stats::mean(c.values), 0.0, 1e-12);
  const auto cc = fracspec::center_sample(c);
  for (std::size_t i = 0; i < c.n(); ++i) EXPECT_NEAR(cc.values[i], c.values[i], 1e-12);
}

TEST(CenterSample, AddedMeanIsRemoved) {
  const auto m = SpectralModel::ar1(0.4);
  const auto shifted = fracspec::sample_path(m, 300, 11, 5.0);
  const auto plain = fracspec::sample_path(m, 300, 11, 0.0);
  EXPECT_EQ(shifted.added_mean, 5.0);
  for (std::size_t i = 0; i < 300; ++i) EXPECT_NEAR(shifted.values[i] - plain.values[i], 5.0, 1e-12);
  const auto a = fracspec::center_sample(shifted);
  const auto b = fracspec::center_sample(plain);
  for (std::size_t i = 0; i < 300; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12);
}

TEST(SamplePath, CsvRoundTrip) {
  const auto p = fracspec::sample_path(SpectralModel::ar1(0.2), 17, 8, 0.25, 3);
  std::stringstream ss;
  fracspec::write_csv(ss, p, {"tool = test"});
  const auto q = fracspec::read_sample_path_csv(ss);
  EXPECT_EQ(q.values, p.values);
  EXPECT_EQ(q.seed, 8u);
  EXPECT_EQ(q.stream, 3u);
  EXPECT_EQ(q.model_id, p.model_id);
  EXPECT_EQ(q.added_mean, 0.25);
  std::stringstream bad("x\n1\n");
  EXPECT_THROW(fracspec::read_sample_path_csv(bad), fracspec::io_error);
}

TEST(LimitProcess, MatchesProjectedCovariance) {
  const auto m = SpectralModel::constant(1.0 / two_pi);
  const auto cov = fracspec::limit_covariance(m, 0.25, {kPi / 4, kPi / 2, kPi, 1.5 * kPi});
  const std::size_t draws = 5000;
  const std::size_t k = cov.size();
  std::vector<std::vector<double>> x(k, std::vector<double>(draws));
  for (std::size_t d = 0; d < draws; ++d) {
    const auto v = fracspec::sample_limit_process(cov, 17, d);
    for (std::size_t i = 0; i < k; ++i) x[i][d] = v[i];
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double sii = cov.projected(i, i);
    EXPECT_NEAR(fracspec::stats::mean(x[i]), 0.0, 5 * std::sqrt(sii / draws));
    for (std::size_t j = i; j < k; ++j) {
      const double sij = cov.projected(i, j);
      const double se = std::sqrt((sii * cov.projected(j, j) + sij * sij) / draws);
      EXPECT_NEAR(fracspec::stats::covariance(x[i], x[j]), sij, 5 * se) << i << "," << j;
    }
  }
  EXPECT_EQ(fracspec::sample_limit_process(cov, 3, 1), fracspec::sample_limit_process(cov, 3, 1));
}

TEST(LimitProcess, DrawsStayInRangeOfClippedFactor) {
  // rank one after clipping the negative eigenvalue
  Eigen::MatrixXd a(3, 3);
  a << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0 - 1e-9;
  const auto cov = fracspec::limit_covariance_from_matrix(0.25, {1.0, 2.0, 3.0}, a);
  ASSERT_TRUE(cov.clip_applied);
  for (std::uint64_t d = 0; d < 20; ++d) {
    const auto v = fracspec::sample_limit_process(cov, 1, d);
    EXPECT_NEAR(v[0], v[1], 1e-6);
    EXPECT_NEAR(v[1], v[2], 1e-6);
  }
}
