#include "l2m/dataset.hpp"

#include "l2m/random.hpp"

#include <cmath>

namespace l2m {

void RegressionDataset::validate() const {
  if (xs.size() == 0) throw DataError("dataset is empty");
  if (xs.size() != ys.size()) throw DataError("dataset x/y lengths differ");
  if (!xs.allFinite() || !ys.allFinite()) throw DataError("dataset has non-finite values");
}

RegressionDataset generate_cubic(Eigen::Index n, double x_low, double x_high, double noise_sigma,
                                 std::uint64_t seed) {
  if (n < 1) throw UsageError("generate_cubic: n must be >= 1");
  if (!(x_low < x_high)) throw UsageError("generate_cubic: need x_low < x_high");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw UsageError("generate_cubic: noise_sigma must be finite and >= 0");
  }
  Rng rng(seed);
  RegressionDataset data;
  data.xs.resize(n);
  data.ys.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) data.xs[i] = rng.uniform(x_low, x_high);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = data.xs[i];
    const double clean = x * x * x;
    data.ys[i] = noise_sigma == 0.0 ? clean : clean + noise_sigma * rng.normal();
  }
  data.meta = DatasetMeta{n, x_low, x_high, noise_sigma, seed};
  return data;
}

Vector<double> eval_grid(double x_low, double x_high, Eigen::Index points) {
  if (points < 2) throw UsageError("eval_grid: need at least 2 points");
  if (!(x_low < x_high)) throw UsageError("eval_grid: need x_low < x_high");
  Vector<double> grid(points);
  const double step = (x_high - x_low) / static_cast<double>(points - 1);
  for (Eigen::Index i = 0; i < points; ++i) grid[i] = x_low + static_cast<double>(i) * step;
  grid[points - 1] = x_high;
  return grid;
}

RegressionDataset bootstrap(const RegressionDataset& data, std::uint64_t seed) {
  data.validate();
  Rng rng(derive_seed(seed, streams::kBootstrap));
  RegressionDataset out;
  out.xs.resize(data.size());
  out.ys.resize(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(data.size())));
    out.xs[i] = data.xs[j];
    out.ys[i] = data.ys[j];
  }
  out.meta = data.meta;
  return out;
}

}  // namespace l2m
