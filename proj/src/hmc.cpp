#include "l2m/hmc.hpp"

#include "l2m/random.hpp"
#include "l2m/tape.hpp"

#include <cmath>
#include <string>

namespace l2m {

void HMCConfig::validate() const {
  if (!(step_size > 0.0)) throw ConfigError("hmc: step_size must be > 0");
  if (leapfrog_steps < 1) throw ConfigError("hmc: leapfrog_steps must be >= 1");
  if (num_samples < 1) throw ConfigError("hmc: num_samples must be >= 1");
  if (burn_in < 0) throw ConfigError("hmc: burn_in must be >= 0");
}

namespace {

double kinetic(const Vector<double>& p) { return 0.5 * p.squaredNorm(); }

}  // namespace

LeapfrogResult leapfrog(const LogDensity& log_density, const Vector<double>& position,
                        const Vector<double>& momentum, double step_size, int steps) {
  Vector<double> grad(position.size());
  const double h_start = -log_density(position, &grad) + kinetic(momentum);

  LeapfrogResult r{position, momentum, 0.0};
  r.momentum += 0.5 * step_size * grad;
  double logp = 0.0;
  for (int i = 1; i <= steps; ++i) {
    r.position += step_size * r.momentum;
    logp = log_density(r.position, &grad);
    if (i < steps) r.momentum += step_size * grad;
  }
  r.momentum += 0.5 * step_size * grad;
  r.delta_h = (-logp + kinetic(r.momentum)) - h_start;
  return r;
}

HMCResult hmc_sample(const LogDensity& log_density, const Vector<double>& initial,
                     const HMCConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, streams::kHmc));
  HMCResult result;
  result.samples.reserve(static_cast<std::size_t>(cfg.num_samples));
  Vector<double> current = initial;
  Vector<double> momentum(initial.size());

  const long total = cfg.burn_in + cfg.num_samples;
  for (long iter = 0; iter < total; ++iter) {
    for (Eigen::Index i = 0; i < momentum.size(); ++i) momentum[i] = rng.normal();
    const LeapfrogResult proposal =
        leapfrog(log_density, current, momentum, cfg.step_size, cfg.leapfrog_steps);
    const double log_u = std::log(1.0 - rng.uniform());

    auto& diag = result.diagnostics;
    ++diag.proposals;
    if (!std::isfinite(proposal.delta_h) || !proposal.position.allFinite()) {
      ++diag.non_finite;
      if (diag.proposals >= 20 && 2 * diag.non_finite > diag.proposals) {
        throw TrainingError("hmc: " + std::to_string(diag.non_finite) + " of " +
                                std::to_string(diag.proposals) +
                                " proposals had non-finite energy; reduce step_size",
                            iter + 1);
      }
    } else {
      diag.energy_errors.push_back(proposal.delta_h);
      if (log_u < -proposal.delta_h) {
        current = proposal.position;
        ++diag.accepted;
      }
    }
    if (iter >= cfg.burn_in) result.samples.push_back(current);
  }
  return result;
}

LogDensity network_log_posterior(const RegressionDataset& data, const MLPConfig& model,
                                 double noise_sigma, double prior_precision) {
  data.validate();
  model.validate();
  if (!(noise_sigma > 0.0)) throw ConfigError("hmc: noise_sigma must be > 0");
  if (!(prior_precision >= 0.0)) throw ConfigError("hmc: prior_precision must be >= 0");
  const double scale = -1.0 / (2.0 * noise_sigma * noise_sigma);
  return [data, model, scale, prior_precision](const Vector<double>& theta,
                                               Vector<double>* grad) -> double {
    thread_local Tape tape;
    tape.clear();
    const auto params = tape.register_parameters(theta);
    std::vector<Var> sq;
    sq.reserve(static_cast<std::size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const Var out = forward(tape, params, data.xs[i], model);
      sq.push_back(tape.square(tape.add_const(out, -data.ys[i])));
    }
    const Var log_lik = tape.scale(sum(tape, sq), scale);
    if (grad) *grad = backward(tape, log_lik) - prior_precision * theta;
    return tape.value(log_lik) - 0.5 * prior_precision * theta.squaredNorm();
  };
}

}  // namespace l2m
