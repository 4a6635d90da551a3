#pragma once

#include "l2m/dataset.hpp"
#include "l2m/mlp.hpp"
#include "l2m/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace l2m {

template <typename Scalar>
struct AdamHyper {
  Scalar lr = Scalar(0.1);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);
  Scalar weight_decay = Scalar(0.1);
};

// First/second moment EMAs of the gradient. `v` is kept after training:
// its bias-corrected value is the diagonal empirical Fisher estimate.
template <typename Scalar>
struct AdamState {
  Vector<Scalar> m;
  Vector<Scalar> v;
  long t = 0;
  AdamHyper<Scalar> hyper;

  static AdamState zeros(Eigen::Index n, const AdamHyper<Scalar>& hyper) {
    return AdamState{Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(n), 0, hyper};
  }
};

// One AdamW step with decoupled decay:
//   params <- params - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * params
// 1 - beta^t to full relative precision for beta close to 1.
template <typename Scalar>
Scalar bias_correction(Scalar beta, long t) {
  return -std::expm1(Scalar(t) * std::log1p(-(Scalar(1) - beta)));
}

// Throws TrainingError (step = t + 1) on a non-finite gradient, leaving all
// arguments untouched.
template <typename Scalar, typename DerivedP, typename DerivedG>
void adam_step(Eigen::MatrixBase<DerivedP>& params, const Eigen::MatrixBase<DerivedG>& grad,
               AdamState<Scalar>& state) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw UsageError("adam_step: shape mismatch");
  }
  if (!grad.allFinite()) throw TrainingError("non-finite gradient", state.t + 1);

  const AdamHyper<Scalar>& h = state.hyper;
  state.t += 1;
  state.m = h.beta1 * state.m + (Scalar(1) - h.beta1) * grad;
  state.v = h.beta2 * state.v + (Scalar(1) - h.beta2) * grad.cwiseAbs2();
  const Scalar m_corr = bias_correction(h.beta1, state.t);
  const Scalar v_corr = bias_correction(h.beta2, state.t);
  const auto m_hat = state.m / m_corr;
  const auto v_hat = state.v / v_corr;
  params = params - h.lr * (m_hat.array() / (v_hat.array().sqrt() + h.eps)).matrix() -
           h.lr * h.weight_decay * params;
}

// Bias-corrected second moment v / (1 - beta2^t). Requires t >= 1.
template <typename Scalar>
Vector<Scalar> second_moment(const AdamState<Scalar>& state) {
  if (state.t < 1) throw UsageError("second_moment: no steps taken");
  return state.v / bias_correction(state.hyper.beta2, state.t);
}

struct TrainConfig {
  long epochs = 5000;
  double lr = 0.1;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_opt = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  AdamHyper<double> hyper() const { return {lr, beta1, beta2, eps_opt, weight_decay}; }
};

// Extra knobs used by the baselines; the defaults give plain MAP training.
struct TrainOptions {
  // Starting point; init_params(model, cfg.seed) when absent.
  std::optional<ParamVector> initial_params;
  // Frozen additive prior network (randomized prior functions):
  // output = net(x; params) + prior_beta * net(x; *prior_params).
  const ParamVector* prior_params = nullptr;
  double prior_beta = 0.0;
  // Called after every step with the 1-based epoch and the updated params.
  std::function<void(long, const ParamVector&)> on_epoch;
};

struct TrainResult {
  ParamVector theta_map;
  AdamState<double> state;
  std::vector<double> loss_history;  // loss at the start of each epoch
};

// Full-batch MSE training: one AdamW step per epoch. Dropout masks are drawn
// fresh per point and epoch when model.dropout_rate > 0.
TrainResult train(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                  const TrainOptions& options = {});

}  // namespace l2m
