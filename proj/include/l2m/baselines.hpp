#pragma once

#include "l2m/adamw.hpp"
#include "l2m/dataset.hpp"
#include "l2m/mlp.hpp"
#include "l2m/posterior.hpp"
#include "l2m/predictive.hpp"

#include <cstdint>
#include <vector>

namespace l2m {

// ---------------------------------------------------------------------------
// Deep ensembles

struct EnsembleMember {
  ParamVector params;
  std::uint64_t seed = 0;
};

struct EnsembleState {
  MLPConfig model;
  std::vector<EnsembleMember> members;
};

// Member k is trained exactly like train() with cfg.seed = base_seed + k.
EnsembleState train_ensemble(const RegressionDataset& data, const MLPConfig& model,
                             const TrainConfig& cfg, int members, std::uint64_t base_seed);

// Mean and population std (divisor M) across member predictions.
PredictiveSummary ensemble_predict(const EnsembleState& state, const Vector<double>& grid,
                                   std::string method = "ensemble");

// ---------------------------------------------------------------------------
// MC dropout

// S passes per grid point, each with a fresh mask; sample std.
PredictiveSummary mc_dropout_predict(const ParamVector& params, const MLPConfig& model,
                                     const Vector<double>& grid, long samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// SWAG-Diagonal

class SWAGDiagState {
 public:
  explicit SWAGDiagState(Eigen::Index dim = 0)
      : running_mean_(Vector<double>::Zero(dim)), running_sq_mean_(Vector<double>::Zero(dim)) {}

  // Folds one parameter snapshot into the cumulative averages.
  void collect(const ParamVector& params);

  const Vector<double>& running_mean() const { return running_mean_; }
  const Vector<double>& running_sq_mean() const { return running_sq_mean_; }
  long snapshots() const { return snapshots_; }

  // max(E[theta^2] - E[theta]^2, 0).
  Vector<double> variance() const;
  // Unclamped E[theta^2] - E[theta]^2.
  Vector<double> raw_variance() const;

 private:
  Vector<double> running_mean_;
  Vector<double> running_sq_mean_;
  long snapshots_ = 0;
};

struct SWAGRun {
  TrainResult training;
  SWAGDiagState state;
};

// Trains with `cfg` and collects every `collect_every` epochs from `start_epoch`
// (1-based, inclusive) onward.
SWAGRun swag_collect(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                     long collect_every = 1, long start_epoch = 4000);

// Needs at least 2 snapshots.
DiagonalGaussian<double> swag_posterior(const SWAGDiagState& state);

// ---------------------------------------------------------------------------
// Randomized prior functions

struct RPFPair {
  ParamVector trainable;
  ParamVector prior;
  double beta = 1.0;
};

// Prior drawn with init_params(model, derive_seed(seed, prior stream)); the
// trainable net starts from init_params(model, seed).
RPFPair rpf_train(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                  double beta, std::uint64_t seed);

double rpf_predict(const RPFPair& pair, double x, const MLPConfig& model);
Vector<double> rpf_predict_batch(const RPFPair& pair, const Vector<double>& xs,
                                 const MLPConfig& model);

// Member k: seed base_seed + k, trained on a bootstrap resample when
// `bootstrap_data` is set.
std::vector<RPFPair> rpf_ensemble(const RegressionDataset& data, const MLPConfig& model,
                                  const TrainConfig& cfg, double beta, int members,
                                  std::uint64_t base_seed, bool bootstrap_data = true);

// Mean and population std across pairs.
PredictiveSummary rpf_ensemble_predict(const std::vector<RPFPair>& pairs, const MLPConfig& model,
                                       const Vector<double>& grid);

// Mean and sample std over networks evaluated at explicit parameter vectors.
PredictiveSummary samples_predict(const std::vector<ParamVector>& thetas, const MLPConfig& model,
                                  const Vector<double>& grid, std::string method,
                                  std::uint64_t seed);

}  // namespace l2m
