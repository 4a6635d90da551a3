#pragma once

#include "l2m/dataset.hpp"
#include "l2m/mlp.hpp"
#include "l2m/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace l2m {

struct HMCConfig {
  double step_size = 1e-3;
  int leapfrog_steps = 20;
  long num_samples = 500;
  long burn_in = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

// Log density up to a constant. When `grad` is non-null it receives the
// gradient of the log density.
using LogDensity = std::function<double(const Vector<double>& position, Vector<double>* grad)>;

struct LeapfrogResult {
  Vector<double> position;
  Vector<double> momentum;
  double delta_h = 0.0;  // H(end) - H(start), H = -log p(q) + |p|^2 / 2
};

// `steps` leapfrog steps of size `step_size` from (position, momentum).
LeapfrogResult leapfrog(const LogDensity& log_density, const Vector<double>& position,
                        const Vector<double>& momentum, double step_size, int steps);

struct HMCDiagnostics {
  long proposals = 0;
  long accepted = 0;
  long non_finite = 0;
  std::vector<double> energy_errors;  // delta H of every finite proposal

  double acceptance_rate() const {
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

struct HMCResult {
  std::vector<Vector<double>> samples;
  HMCDiagnostics diagnostics;
};

// Plain HMC with identity mass matrix. Proposals with a non-finite energy are
// rejected and counted; once more than half of at least 20 proposals are
// non-finite the run aborts with a TrainingError.
HMCResult hmc_sample(const LogDensity& log_density, const Vector<double>& initial,
                     const HMCConfig& cfg);

// -SSR / (2 noise_sigma^2) - prior_precision / 2 * |theta|^2, gradient via the tape.
LogDensity network_log_posterior(const RegressionDataset& data, const MLPConfig& model,
                                 double noise_sigma, double prior_precision);

}  // namespace l2m
