#pragma once

#include "l2m/random.hpp"
#include "l2m/tape.hpp"
#include "l2m/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace l2m {

enum class Activation { relu };

// Fully connected network: input -> hidden_layers x hidden_units (ReLU) -> output.
// hidden_layers = 0 gives a plain affine map.
struct MLPConfig {
  int input_dim = 1;
  int hidden_layers = 2;
  int hidden_units = 40;
  int output_dim = 1;
  Activation activation = Activation::relu;
  double dropout_rate = 0.0;

  void validate() const;
  Eigen::Index param_count() const;
};

struct LayerShape {
  int in;
  int out;
  Eigen::Index weight_offset;  // row-major out x in block
  Eigen::Index bias_offset;
};

std::vector<LayerShape> layer_shapes(const MLPConfig& config);

// Inverted-dropout multipliers for the hidden activations of one forward pass.
// Entries are 0 (dropped) or 1/(1-p) (kept).
struct DropoutMask {
  double rate = 0.0;
  std::vector<Vector<double>> layers;

  static DropoutMask ones(const MLPConfig& config);
  static DropoutMask zeros(const MLPConfig& config);
  static DropoutMask sample(const MLPConfig& config, Rng& rng);

  // Throws UsageError if the layer count/widths do not match `config`.
  void check_shape(const MLPConfig& config) const;
};

// Uniform fan-in init on [-sqrt(6/fan_in), sqrt(6/fan_in)], zero biases.
ParamVector init_params(const MLPConfig& config, std::uint64_t seed);

// Tape-free evaluation for a 1-D input and output.
double predict(const ParamVector& params, double x, const MLPConfig& config,
               const DropoutMask* mask = nullptr);

// Tape-free evaluation over many inputs at once (no dropout).
Vector<double> predict_batch(const ParamVector& params, const Vector<double>& xs,
                             const MLPConfig& config);

// Records the network on `tape` using already-registered parameter leaves.
Var forward(Tape& tape, std::span<const Var> params, double x, const MLPConfig& config,
            const DropoutMask* mask = nullptr);

// Registers `params` on `tape` and records one forward pass; returns the output value.
double forward(const ParamVector& params, double x, const MLPConfig& config, Tape& tape);

}  // namespace l2m
