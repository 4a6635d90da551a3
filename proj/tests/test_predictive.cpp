#include "l2m/dataset.hpp"
#include "l2m/predictive.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace l2m;

MLPConfig linear_model() {
  MLPConfig m;
  m.hidden_layers = 0;
  return m;
}

DiagonalGaussian<double> weight_only(double mu, double sigma) {
  DiagonalGaussian<double> post;
  post.mean = Vector<double>::Zero(2);
  post.mean[0] = mu;
  post.std = Vector<double>::Zero(2);
  post.std[0] = sigma;
  return post;
}

TEST(McPredictive, ZeroStdPosteriorGivesMapPrediction) {
  MLPConfig model;
  DiagonalGaussian<double> post{init_params(model, 4), Vector<double>::Zero(model.param_count())};
  const auto grid = eval_grid();
  const auto s = mc_predictive(post, model, grid, 500, 1);
  EXPECT_EQ(s.mean, predict_batch(post.mean, grid, model));
  EXPECT_EQ(s.std, Vector<double>::Zero(grid.size()));
  EXPECT_EQ(s.samples_used, 500);
}

TEST(McPredictive, LinearPushforwardStd) {
  const auto post = weight_only(0.7, 0.4);
  Vector<double> grid(3);
  grid << -5.0, 1.0, 3.0;
  const auto s = mc_predictive(post, linear_model(), grid, 100000, 3);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(s.std[i], std::abs(grid[i]) * 0.4, 0.03 * std::abs(grid[i]) * 0.4);
  }
}

TEST(McPredictive, DeterministicGivenSeed) {
  MLPConfig model;
  DiagonalGaussian<double> post{init_params(model, 4), Vector<double>::Constant(model.param_count(), 0.05)};
  const auto grid = eval_grid();
  const auto a = mc_predictive(post, model, grid, 50, 9);
  const auto b = mc_predictive(post, model, grid, 50, 9);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
}

TEST(McPredictive, NeedsTwoSamples) {
  const auto post = weight_only(0.0, 1.0);
  EXPECT_THROW(mc_predictive(post, linear_model(), eval_grid(), 1, 0), UsageError);
}

TEST(McPredictive, MeanErrorScalesAsInverseSqrtS) {
  // Spread of the mean estimate at S and 4S across independent replications.
  // The ratio of two spread estimates from R replications has relative noise
  // of about 1/sqrt(R - 1), so R must be well above 30 for a 20% tolerance.
  constexpr int kReps = 400;
  const auto post = weight_only(1.0, 1.0);
  Vector<double> grid = Vector<double>::Constant(1, 2.0);
  auto spread = [&](long samples, std::uint64_t base) {
    double sum = 0, sq = 0;
    for (int r = 0; r < kReps; ++r) {
      const double m = mc_predictive(post, linear_model(), grid, samples, base + r).mean[0];
      sum += m;
      sq += m * m;
    }
    const double mean = sum / kReps;
    return std::sqrt((sq - kReps * mean * mean) / (kReps - 1));
  };
  const double ratio = spread(200, 10000) / spread(800, 20000);
  EXPECT_GT(ratio, 2.0 * 0.8);
  EXPECT_LT(ratio, 2.0 * 1.2);
}

TEST(Summarize, PopulationAndSampleDivisors) {
  Matrix<double> preds(2, 3);
  preds << 1, 1, 1, 3, 3, 3;
  const auto grid = eval_grid(0, 1, 3);
  const auto pop = summarize(preds, grid, StdDivisor::population, "t", 0);
  EXPECT_EQ(pop.mean, Vector<double>::Constant(3, 2.0));
  EXPECT_EQ(pop.std, Vector<double>::Constant(3, 1.0));
  const auto smp = summarize(preds, grid, StdDivisor::sample, "t", 0);
  EXPECT_NEAR(smp.std[0], std::sqrt(2.0), 1e-15);
}

TEST(ObservationNoise, AddsInQuadrature) {
  PredictiveSummary s;
  s.grid = eval_grid(0, 1, 2);
  s.mean = Vector<double>::Zero(2);
  s.std = Vector<double>::Constant(2, 4.0);
  const auto noisy = with_observation_noise(s, 3.0);
  EXPECT_NEAR(noisy.std[0], 5.0, 1e-15);
}

TEST(BandTable, UnitStdGivesIntegerBands) {
  PredictiveSummary s;
  s.grid = eval_grid(-1, 1, 3);
  s.mean = Vector<double>::Zero(3);
  s.std = Vector<double>::Ones(3);
  const auto t = band_table(s);
  ASSERT_EQ(t.rows.cols(), 8);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(t.rows(i, 2), -1.0);
    EXPECT_EQ(t.rows(i, 3), 1.0);
    EXPECT_EQ(t.rows(i, 4), -2.0);
    EXPECT_EQ(t.rows(i, 5), 2.0);
    EXPECT_EQ(t.rows(i, 6), -3.0);
    EXPECT_EQ(t.rows(i, 7), 3.0);
  }
}

TEST(BandTable, ZeroStdCollapsesAndBandsNest) {
  PredictiveSummary s;
  s.grid = eval_grid(-6, 6, 25);
  s.mean = s.grid.array().cube().matrix();
  s.std = Vector<double>::Zero(25);
  auto t = band_table(s);
  for (Eigen::Index i = 0; i < 25; ++i) {
    for (Eigen::Index c = 2; c < 8; ++c) EXPECT_EQ(t.rows(i, c), s.mean[i]);
  }
  s.std = s.grid.cwiseAbs() + Vector<double>::Constant(25, 0.1);
  t = band_table(s, {0.5, 1.0, 2.5});
  for (Eigen::Index i = 0; i < 25; ++i) {
    for (int k = 0; k + 1 < 3; ++k) {
      EXPECT_LE(t.rows(i, 2 + 2 * (k + 1)), t.rows(i, 2 + 2 * k));
      EXPECT_GE(t.rows(i, 3 + 2 * (k + 1)), t.rows(i, 3 + 2 * k));
    }
  }
  EXPECT_THROW(band_table(s, {}), UsageError);
}

TEST(RegionStats, RatioAndDegenerateCase) {
  PredictiveSummary s;
  s.grid = eval_grid(-6, 6, 13);
  s.mean = Vector<double>::Zero(13);
  s.std = s.grid.cwiseAbs();
  const auto r = region_stats(s, 2.0, 4.5);
  EXPECT_NEAR(r.inner_mean_std, (2 + 1 + 0 + 1 + 2) / 5.0, 1e-15);
  EXPECT_NEAR(r.outer_mean_std, 5.5, 1e-15);
  ASSERT_TRUE(r.ratio.has_value());
  EXPECT_NEAR(*r.ratio, 5.5 / 1.2, 1e-12);
  s.std.setZero();
  EXPECT_FALSE(region_stats(s).ratio.has_value());
}

}  // namespace
