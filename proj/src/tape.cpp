#include "l2m/tape.hpp"

#include <string>

namespace l2m {

void Tape::clear() {
  nodes_.clear();
  param_vars_.clear();
}

std::span<const Var> Tape::register_parameters(const ParamVector& params) {
  if (!param_vars_.empty()) {
    throw UsageError("tape already has a registered parameter block");
  }
  param_vars_.reserve(static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    param_vars_.push_back(push(params[i], -1, 0.0, -1, 0.0));
  }
  return param_vars_;
}

std::vector<double> Tape::adjoints(Var output) const {
  if (output.index < 0 || static_cast<std::size_t>(output.index) >= nodes_.size()) {
    throw UsageError("node " + std::to_string(output.index) + " is not on the tape");
  }
  std::vector<double> adj(static_cast<std::size_t>(output.index) + 1, 0.0);
  adj.back() = 1.0;
  for (std::int32_t i = output.index; i >= 0; --i) {
    const double g = adj[static_cast<std::size_t>(i)];
    if (g == 0.0) continue;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.parent_a >= 0) adj[static_cast<std::size_t>(n.parent_a)] += g * n.partial_a;
    if (n.parent_b >= 0) adj[static_cast<std::size_t>(n.parent_b)] += g * n.partial_b;
  }
  return adj;
}

Var sum(Tape& tape, std::span<const Var> terms) {
  if (terms.empty()) return tape.constant(0.0);
  Var acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
  return acc;
}

Var mse_loss(Tape& tape, std::span<const Var> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw UsageError("mse_loss: empty input");
  if (predictions.size() != targets.size()) throw UsageError("mse_loss: length mismatch");
  Var acc = tape.square(tape.add_const(predictions[0], -targets[0]));
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    acc = tape.add(acc, tape.square(tape.add_const(predictions[i], -targets[i])));
  }
  return tape.scale(acc, 1.0 / static_cast<double>(predictions.size()));
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw UsageError("mse_loss: empty input");
  if (predictions.size() != targets.size()) throw UsageError("mse_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    acc += r * r;
  }
  return acc / static_cast<double>(predictions.size());
}

ParamVector backward(const Tape& tape, Var loss) {
  const std::vector<double> adj = tape.adjoints(loss);
  const auto params = tape.parameters();
  ParamVector grad = ParamVector::Zero(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto idx = static_cast<std::size_t>(params[i].index);
    if (idx < adj.size()) grad[static_cast<Eigen::Index>(i)] = adj[idx];
  }
  return grad;
}

}  // namespace l2m
