#include "l2m/predictive.hpp"

#include "l2m/parallel.hpp"
#include "l2m/random.hpp"

#include <cmath>

namespace l2m {

PredictiveSummary summarize(const Matrix<double>& predictions, const Vector<double>& grid,
                            StdDivisor divisor, std::string method, std::uint64_t seed) {
  const Eigen::Index samples = predictions.rows();
  if (samples < 1) throw UsageError("summarize: no samples");
  if (predictions.cols() != grid.size()) throw UsageError("summarize: grid size mismatch");
  if (divisor == StdDivisor::sample && samples < 2) {
    throw UsageError("summarize: sample std needs at least 2 samples");
  }

  Vector<double> mean = predictions.row(0).transpose();
  Vector<double> m2 = Vector<double>::Zero(grid.size());
  for (Eigen::Index s = 1; s < samples; ++s) {
    const double k = static_cast<double>(s + 1);
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      const double x = predictions(s, g);
      const double delta = x - mean[g];
      mean[g] += delta / k;
      m2[g] += delta * (x - mean[g]);
    }
  }
  const double denom = static_cast<double>(divisor == StdDivisor::sample ? samples - 1 : samples);
  PredictiveSummary out;
  out.grid = grid;
  out.mean = std::move(mean);
  out.std = (m2.array().max(0.0) / denom).sqrt().matrix();
  out.samples_used = static_cast<long>(samples);
  out.method = std::move(method);
  out.seed = seed;
  return out;
}

PredictiveSummary mc_predictive(const DiagonalGaussian<double>& posterior, const MLPConfig& model,
                                const Vector<double>& grid, long samples, std::uint64_t seed,
                                std::string method) {
  if (samples < 2) throw UsageError("mc_predictive: need at least 2 samples");
  if (posterior.size() != model.param_count()) {
    throw ConfigError("mc_predictive: posterior does not match the model");
  }
  Matrix<double> preds(samples, grid.size());
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    const ParamVector theta = sample(posterior, derive_seed(seed, s));
    preds.row(static_cast<Eigen::Index>(s)) = predict_batch(theta, grid, model).transpose();
  });
  return summarize(preds, grid, StdDivisor::sample, std::move(method), seed);
}

PredictiveSummary with_observation_noise(PredictiveSummary summary, double noise_sigma) {
  summary.std = (summary.std.array().square() + noise_sigma * noise_sigma).sqrt().matrix();
  return summary;
}

BandTable band_table(const PredictiveSummary& summary, const std::vector<double>& ks) {
  if (ks.empty()) throw UsageError("band_table: ks must be nonempty");
  BandTable table{ks, Matrix<double>(summary.grid.size(), 2 + 2 * static_cast<Eigen::Index>(ks.size()))};
  for (Eigen::Index i = 0; i < summary.grid.size(); ++i) {
    table.rows(i, 0) = summary.grid[i];
    table.rows(i, 1) = summary.mean[i];
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const auto c = 2 + 2 * static_cast<Eigen::Index>(j);
      table.rows(i, c) = summary.mean[i] - ks[j] * summary.std[i];
      table.rows(i, c + 1) = summary.mean[i] + ks[j] * summary.std[i];
    }
  }
  return table;
}

RegionStats region_stats(const PredictiveSummary& summary, double inner, double outer) {
  double inner_sum = 0.0, outer_sum = 0.0;
  long inner_n = 0, outer_n = 0;
  for (Eigen::Index i = 0; i < summary.grid.size(); ++i) {
    const double ax = std::abs(summary.grid[i]);
    if (ax <= inner) {
      inner_sum += summary.std[i];
      ++inner_n;
    }
    if (ax >= outer) {
      outer_sum += summary.std[i];
      ++outer_n;
    }
  }
  RegionStats stats;
  if (inner_n > 0) stats.inner_mean_std = inner_sum / static_cast<double>(inner_n);
  if (outer_n > 0) stats.outer_mean_std = outer_sum / static_cast<double>(outer_n);
  if (inner_n > 0 && outer_n > 0 && stats.inner_mean_std > 0.0) {
    stats.ratio = stats.outer_mean_std / stats.inner_mean_std;
  }
  return stats;
}

}  // namespace l2m
