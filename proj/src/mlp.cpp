#include "l2m/mlp.hpp"

#include <cmath>
#include <string>

namespace l2m {

namespace {

void check_params(const ParamVector& params, const MLPConfig& config) {
  if (params.size() != config.param_count()) {
    throw ConfigError("parameter vector has " + std::to_string(params.size()) +
                      " entries, model expects " + std::to_string(config.param_count()));
  }
}

void check_scalar_io(const MLPConfig& config) {
  if (config.input_dim != 1 || config.output_dim != 1) {
    throw ConfigError("scalar evaluation needs input_dim = output_dim = 1");
  }
}

}  // namespace

void MLPConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("input_dim and output_dim must be >= 1");
  if (hidden_layers < 0) throw ConfigError("hidden_layers must be >= 0");
  if (hidden_layers > 0 && hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
}

Eigen::Index MLPConfig::param_count() const {
  Eigen::Index count = 0;
  for (const LayerShape& l : layer_shapes(*this)) count += Eigen::Index{l.in} * l.out + l.out;
  return count;
}

std::vector<LayerShape> layer_shapes(const MLPConfig& config) {
  std::vector<LayerShape> shapes;
  Eigen::Index offset = 0;
  int in = config.input_dim;
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const int out = l == config.hidden_layers ? config.output_dim : config.hidden_units;
    LayerShape s{in, out, offset, offset + Eigen::Index{in} * out};
    offset = s.bias_offset + out;
    shapes.push_back(s);
    in = out;
  }
  return shapes;
}

DropoutMask DropoutMask::ones(const MLPConfig& config) {
  DropoutMask m{config.dropout_rate, {}};
  for (int l = 0; l < config.hidden_layers; ++l) {
    m.layers.push_back(Vector<double>::Ones(config.hidden_units));
  }
  return m;
}

DropoutMask DropoutMask::zeros(const MLPConfig& config) {
  DropoutMask m{config.dropout_rate, {}};
  for (int l = 0; l < config.hidden_layers; ++l) {
    m.layers.push_back(Vector<double>::Zero(config.hidden_units));
  }
  return m;
}

DropoutMask DropoutMask::sample(const MLPConfig& config, Rng& rng) {
  const double p = config.dropout_rate;
  if (p == 0.0) return ones(config);
  const double keep_scale = 1.0 / (1.0 - p);
  DropoutMask m{p, {}};
  for (int l = 0; l < config.hidden_layers; ++l) {
    Vector<double> layer(config.hidden_units);
    for (Eigen::Index i = 0; i < layer.size(); ++i) {
      layer[i] = rng.uniform() < p ? 0.0 : keep_scale;
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

void DropoutMask::check_shape(const MLPConfig& config) const {
  if (static_cast<int>(layers.size()) != config.hidden_layers) {
    throw UsageError("dropout mask has " + std::to_string(layers.size()) +
                     " layers, model has " + std::to_string(config.hidden_layers));
  }
  for (const auto& layer : layers) {
    if (layer.size() != config.hidden_units) throw UsageError("dropout mask width mismatch");
  }
}

ParamVector init_params(const MLPConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, streams::kInit));
  ParamVector params = ParamVector::Zero(config.param_count());
  for (const LayerShape& l : layer_shapes(config)) {
    const double bound = std::sqrt(6.0 / l.in);
    for (Eigen::Index i = 0; i < Eigen::Index{l.in} * l.out; ++i) {
      params[l.weight_offset + i] = rng.uniform(-bound, bound);
    }
  }
  return params;
}

double predict(const ParamVector& params, double x, const MLPConfig& config,
               const DropoutMask* mask) {
  check_params(params, config);
  check_scalar_io(config);
  if (mask) mask->check_shape(config);
  const auto shapes = layer_shapes(config);
  Vector<double> h = Vector<double>::Constant(1, x);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    Eigen::Map<const RowMajorMatrix<double>> w(params.data() + s.weight_offset, s.out, s.in);
    Eigen::Map<const Vector<double>> b(params.data() + s.bias_offset, s.out);
    Vector<double> z = w * h + b;
    if (l + 1 < shapes.size()) {
      z = z.cwiseMax(0.0);
      if (mask) z = z.cwiseProduct(mask->layers[l]);
    }
    h = std::move(z);
  }
  return h[0];
}

Vector<double> predict_batch(const ParamVector& params, const Vector<double>& xs,
                             const MLPConfig& config) {
  check_params(params, config);
  check_scalar_io(config);
  const auto shapes = layer_shapes(config);
  Matrix<double> h = xs.transpose();
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    Eigen::Map<const RowMajorMatrix<double>> w(params.data() + s.weight_offset, s.out, s.in);
    Eigen::Map<const Vector<double>> b(params.data() + s.bias_offset, s.out);
    Matrix<double> z = (w * h).colwise() + b;
    if (l + 1 < shapes.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h.row(0).transpose();
}

Var forward(Tape& tape, std::span<const Var> params, double x, const MLPConfig& config,
            const DropoutMask* mask) {
  check_scalar_io(config);
  if (static_cast<Eigen::Index>(params.size()) != config.param_count()) {
    throw ConfigError("parameter block has " + std::to_string(params.size()) +
                      " entries, model expects " + std::to_string(config.param_count()));
  }
  if (mask) mask->check_shape(config);
  const auto shapes = layer_shapes(config);
  std::vector<Var> h{tape.constant(x)};
  std::vector<Var> next;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    next.clear();
    for (int j = 0; j < s.out; ++j) {
      Var acc = params[static_cast<std::size_t>(s.bias_offset + j)];
      for (int i = 0; i < s.in; ++i) {
        const Var w = params[static_cast<std::size_t>(s.weight_offset + Eigen::Index{j} * s.in + i)];
        acc = tape.add(acc, tape.mul(w, h[static_cast<std::size_t>(i)]));
      }
      if (l + 1 < shapes.size()) {
        acc = tape.relu(acc);
        if (mask) acc = tape.scale(acc, mask->layers[l][j]);
      }
      next.push_back(acc);
    }
    std::swap(h, next);
  }
  return h[0];
}

double forward(const ParamVector& params, double x, const MLPConfig& config, Tape& tape) {
  check_params(params, config);
  const auto vars = tape.register_parameters(params);
  return tape.value(forward(tape, vars, x, config));
}

}  // namespace l2m
