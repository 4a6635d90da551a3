#include "l2m/baselines.hpp"

#include "l2m/parallel.hpp"
#include "l2m/random.hpp"

#include <string>

namespace l2m {

EnsembleState train_ensemble(const RegressionDataset& data, const MLPConfig& model,
                             const TrainConfig& cfg, int members, std::uint64_t base_seed) {
  if (members < 1) throw UsageError("train_ensemble: members must be >= 1");
  EnsembleState state{model, std::vector<EnsembleMember>(static_cast<std::size_t>(members))};
  parallel_for(state.members.size(), [&](std::size_t k) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = base_seed + k;
    try {
      state.members[k] = EnsembleMember{train(data, model, member_cfg).theta_map, member_cfg.seed};
    } catch (const TrainingError& e) {
      throw TrainingError("ensemble member " + std::to_string(k) + ": " + e.what(), e.step());
    }
  });
  return state;
}

PredictiveSummary ensemble_predict(const EnsembleState& state, const Vector<double>& grid,
                                   std::string method) {
  if (state.members.empty()) throw UsageError("ensemble_predict: no members");
  Matrix<double> preds(static_cast<Eigen::Index>(state.members.size()), grid.size());
  for (std::size_t k = 0; k < state.members.size(); ++k) {
    preds.row(static_cast<Eigen::Index>(k)) =
        predict_batch(state.members[k].params, grid, state.model).transpose();
  }
  const std::uint64_t seed = state.members.front().seed;
  return summarize(preds, grid, StdDivisor::population, std::move(method), seed);
}

PredictiveSummary mc_dropout_predict(const ParamVector& params, const MLPConfig& model,
                                     const Vector<double>& grid, long samples,
                                     std::uint64_t seed) {
  if (samples < 2) throw UsageError("mc_dropout_predict: need at least 2 samples");
  Matrix<double> preds(samples, grid.size());
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      const DropoutMask mask = DropoutMask::sample(model, rng);
      preds(static_cast<Eigen::Index>(s), g) = predict(params, grid[g], model, &mask);
    }
  });
  return summarize(preds, grid, StdDivisor::sample, "mc-dropout", seed);
}

void SWAGDiagState::collect(const ParamVector& params) {
  if (running_mean_.size() == 0 && snapshots_ == 0) {
    running_mean_ = Vector<double>::Zero(params.size());
    running_sq_mean_ = Vector<double>::Zero(params.size());
  }
  if (params.size() != running_mean_.size()) throw UsageError("swag: snapshot shape mismatch");
  ++snapshots_;
  const double k = static_cast<double>(snapshots_);
  running_mean_ += (params - running_mean_) / k;
  running_sq_mean_ += (params.cwiseAbs2() - running_sq_mean_) / k;
}

Vector<double> SWAGDiagState::raw_variance() const {
  return running_sq_mean_ - running_mean_.cwiseAbs2();
}

Vector<double> SWAGDiagState::variance() const { return raw_variance().cwiseMax(0.0); }

SWAGRun swag_collect(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                     long collect_every, long start_epoch) {
  if (collect_every < 1) throw UsageError("swag_collect: collect_every must be >= 1");
  if (start_epoch < 1 || start_epoch >= cfg.epochs) {
    throw UsageError("swag_collect: start_epoch must lie in [1, epochs)");
  }
  SWAGRun run{{}, SWAGDiagState(model.param_count())};
  TrainOptions options;
  options.on_epoch = [&](long epoch, const ParamVector& params) {
    if (epoch >= start_epoch && (epoch - start_epoch) % collect_every == 0) {
      run.state.collect(params);
    }
  };
  run.training = train(data, model, cfg, options);
  return run;
}

DiagonalGaussian<double> swag_posterior(const SWAGDiagState& state) {
  if (state.snapshots() == 0) throw UsageError("swag_posterior: no snapshots collected");
  if (state.snapshots() < 2) throw UsageError("swag_posterior: need at least 2 snapshots");
  DiagonalGaussian<double> post;
  post.mean = state.running_mean();
  post.std = state.variance().cwiseSqrt();
  return post;
}

RPFPair rpf_train(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                  double beta, std::uint64_t seed) {
  if (!(beta >= 0.0)) throw UsageError("rpf_train: beta must be >= 0");
  RPFPair pair;
  pair.beta = beta;
  pair.prior = init_params(model, derive_seed(seed, streams::kPrior));
  TrainConfig pair_cfg = cfg;
  pair_cfg.seed = seed;
  TrainOptions options;
  options.prior_params = &pair.prior;
  options.prior_beta = beta;
  pair.trainable = train(data, model, pair_cfg, options).theta_map;
  return pair;
}

double rpf_predict(const RPFPair& pair, double x, const MLPConfig& model) {
  const double base = predict(pair.trainable, x, model);
  if (pair.beta == 0.0) return base;
  return base + pair.beta * predict(pair.prior, x, model);
}

Vector<double> rpf_predict_batch(const RPFPair& pair, const Vector<double>& xs,
                                 const MLPConfig& model) {
  Vector<double> out = predict_batch(pair.trainable, xs, model);
  if (pair.beta != 0.0) out += pair.beta * predict_batch(pair.prior, xs, model);
  return out;
}

std::vector<RPFPair> rpf_ensemble(const RegressionDataset& data, const MLPConfig& model,
                                  const TrainConfig& cfg, double beta, int members,
                                  std::uint64_t base_seed, bool bootstrap_data) {
  if (members < 1) throw UsageError("rpf_ensemble: members must be >= 1");
  std::vector<RPFPair> pairs(static_cast<std::size_t>(members));
  parallel_for(pairs.size(), [&](std::size_t k) {
    const std::uint64_t seed = base_seed + k;
    try {
      pairs[k] = bootstrap_data ? rpf_train(bootstrap(data, seed), model, cfg, beta, seed)
                                : rpf_train(data, model, cfg, beta, seed);
    } catch (const TrainingError& e) {
      throw TrainingError("rpf member " + std::to_string(k) + ": " + e.what(), e.step());
    }
  });
  return pairs;
}

PredictiveSummary rpf_ensemble_predict(const std::vector<RPFPair>& pairs, const MLPConfig& model,
                                       const Vector<double>& grid) {
  if (pairs.empty()) throw UsageError("rpf_ensemble_predict: no pairs");
  Matrix<double> preds(static_cast<Eigen::Index>(pairs.size()), grid.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    preds.row(static_cast<Eigen::Index>(k)) = rpf_predict_batch(pairs[k], grid, model).transpose();
  }
  return summarize(preds, grid, StdDivisor::population, "rpf", 0);
}

PredictiveSummary samples_predict(const std::vector<ParamVector>& thetas, const MLPConfig& model,
                                  const Vector<double>& grid, std::string method,
                                  std::uint64_t seed) {
  Matrix<double> preds(static_cast<Eigen::Index>(thetas.size()), grid.size());
  parallel_for(thetas.size(), [&](std::size_t s) {
    preds.row(static_cast<Eigen::Index>(s)) = predict_batch(thetas[s], grid, model).transpose();
  });
  return summarize(preds, grid, StdDivisor::sample, std::move(method), seed);
}

}  // namespace l2m
