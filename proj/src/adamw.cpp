#include "l2m/adamw.hpp"

#include "l2m/random.hpp"
#include "l2m/tape.hpp"

#include <cmath>

namespace l2m {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(eps_opt >= 0.0)) throw ConfigError("eps_opt must be >= 0");
}

TrainResult train(const RegressionDataset& data, const MLPConfig& model, const TrainConfig& cfg,
                  const TrainOptions& options) {
  data.validate();
  model.validate();
  cfg.validate();

  TrainResult result;
  result.theta_map = options.initial_params ? *options.initial_params : init_params(model, cfg.seed);
  if (result.theta_map.size() != model.param_count()) {
    throw ConfigError("initial parameters do not match the model");
  }
  result.state = AdamState<double>::zeros(model.param_count(), cfg.hyper());
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  const Eigen::Index n = data.size();
  std::vector<double> targets(data.ys.data(), data.ys.data() + n);
  if (options.prior_params && options.prior_beta != 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      targets[static_cast<std::size_t>(i)] -=
          options.prior_beta * predict(*options.prior_params, data.xs[i], model);
    }
  }

  const bool dropout = model.dropout_rate > 0.0;
  Rng mask_rng(derive_seed(cfg.seed, streams::kDropout));

  Tape tape;
  std::vector<Var> outputs(static_cast<std::size_t>(n));
  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.clear();
    const auto params = tape.register_parameters(result.theta_map);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dropout) {
        const DropoutMask mask = DropoutMask::sample(model, mask_rng);
        outputs[static_cast<std::size_t>(i)] = forward(tape, params, data.xs[i], model, &mask);
      } else {
        outputs[static_cast<std::size_t>(i)] = forward(tape, params, data.xs[i], model);
      }
    }
    const Var loss = mse_loss(tape, outputs, targets);
    const double loss_value = tape.value(loss);
    if (!std::isfinite(loss_value)) throw TrainingError("non-finite training loss", epoch);
    result.loss_history.push_back(loss_value);

    const ParamVector grad = backward(tape, loss);
    try {
      adam_step(result.theta_map, grad, result.state);
    } catch (const TrainingError& e) {
      throw TrainingError("non-finite gradient", epoch);
    }
    if (options.on_epoch) options.on_epoch(epoch, result.theta_map);
  }
  return result;
}

}  // namespace l2m
