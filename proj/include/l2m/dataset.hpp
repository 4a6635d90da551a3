#pragma once

#include "l2m/types.hpp"

#include <cstdint>

namespace l2m {

struct DatasetMeta {
  Eigen::Index n = 0;
  double x_low = -4.0;
  double x_high = 4.0;
  double noise_sigma = 3.0;
  std::uint64_t seed = 0;
};

struct RegressionDataset {
  Vector<double> xs;
  Vector<double> ys;
  DatasetMeta meta;

  Eigen::Index size() const { return xs.size(); }
  // Throws DataError on mismatched lengths, empty data, or non-finite values.
  void validate() const;
};

// xs ~ U[x_low, x_high], ys = xs^3 + N(0, noise_sigma^2).
RegressionDataset generate_cubic(Eigen::Index n = 20, double x_low = -4.0, double x_high = 4.0,
                                 double noise_sigma = 3.0, std::uint64_t seed = 0);

// Evenly spaced grid including both endpoints.
Vector<double> eval_grid(double x_low = -6.0, double x_high = 6.0, Eigen::Index points = 200);

// Resample with replacement, same size.
RegressionDataset bootstrap(const RegressionDataset& data, std::uint64_t seed);

}  // namespace l2m
