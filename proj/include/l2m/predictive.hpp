#pragma once

#include "l2m/mlp.hpp"
#include "l2m/posterior.hpp"
#include "l2m/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace l2m {

struct PredictiveSummary {
  Vector<double> grid;
  Vector<double> mean;
  Vector<double> std;
  long samples_used = 0;
  std::string method;
  std::uint64_t seed = 0;
};

enum class StdDivisor { population, sample };

// Per-column mean and std of an (S x G) prediction matrix. Rows are reduced
// in index order with Welford updates, so identical rows give exactly that
// row as the mean and exactly zero std.
PredictiveSummary summarize(const Matrix<double>& predictions, const Vector<double>& grid,
                            StdDivisor divisor, std::string method, std::uint64_t seed);

// Monte Carlo posterior predictive: S weight draws (draw s uses
// derive_seed(seed, s)), each evaluated on the whole grid. Sample std, S >= 2.
PredictiveSummary mc_predictive(const DiagonalGaussian<double>& posterior, const MLPConfig& model,
                                const Vector<double>& grid, long samples, std::uint64_t seed,
                                std::string method = "l2m");

// sqrt(std^2 + noise_sigma^2); adds observation noise to an epistemic summary.
PredictiveSummary with_observation_noise(PredictiveSummary summary, double noise_sigma);

// Rows of (x, mean, mean - k std, mean + k std for each k).
struct BandTable {
  std::vector<double> ks;
  Matrix<double> rows;
};

BandTable band_table(const PredictiveSummary& summary, const std::vector<double>& ks = {1, 2, 3});

// Mean std over |x| <= inner and over |x| >= outer.
struct RegionStats {
  double inner_mean_std = 0.0;
  double outer_mean_std = 0.0;
  // outer / inner, empty when inner is zero or either region has no points.
  std::optional<double> ratio;
};

RegionStats region_stats(const PredictiveSummary& summary, double inner = 2.0, double outer = 4.5);

}  // namespace l2m
