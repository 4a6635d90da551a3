#pragma once

#include "l2m/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace l2m {

// Handle to a node on a Tape.
struct Var {
  std::int32_t index = -1;
};

// Scalar reverse-mode tape.
//
// Every primitive appends one node holding its value and the local partials
// with respect to at most two parent nodes. Parents always precede children,
// so a single reverse sweep over the node list visits each node once.
//
// Parameters are registered as one contiguous block of leaves; backward()
// returns the adjoints of that block as a ParamVector.
class Tape {
 public:
  Tape() = default;

  // Drops all nodes but keeps the allocation for reuse.
  void clear();
  void reserve(std::size_t nodes) { nodes_.reserve(nodes); }

  std::size_t size() const { return nodes_.size(); }

  // Registers `params` as differentiable leaves. Only one block per tape.
  std::span<const Var> register_parameters(const ParamVector& params);
  std::span<const Var> parameters() const { return param_vars_; }

  Var constant(double value) { return push(value, -1, 0.0, -1, 0.0); }

  Var add(Var a, Var b) { return push(value(a) + value(b), a.index, 1.0, b.index, 1.0); }
  Var sub(Var a, Var b) { return push(value(a) - value(b), a.index, 1.0, b.index, -1.0); }
  Var mul(Var a, Var b) {
    return push(value(a) * value(b), a.index, value(b), b.index, value(a));
  }
  Var scale(Var a, double c) { return push(c * value(a), a.index, c, -1, 0.0); }
  Var add_const(Var a, double c) { return push(value(a) + c, a.index, 1.0, -1, 0.0); }
  Var square(Var a) {
    const double x = value(a);
    return push(x * x, a.index, 2.0 * x, -1, 0.0);
  }
  // Subgradient at exactly zero is 0.
  Var relu(Var a) {
    const double x = value(a);
    return x > 0.0 ? push(x, a.index, 1.0, -1, 0.0) : push(0.0, a.index, 0.0, -1, 0.0);
  }

  double value(Var v) const { return nodes_[static_cast<std::size_t>(v.index)].value; }

  // Adjoint of every node with respect to `output`. The tape is not modified.
  std::vector<double> adjoints(Var output) const;

 private:
  struct Node {
    double value;
    double partial_a;
    double partial_b;
    std::int32_t parent_a;
    std::int32_t parent_b;
  };

  Var push(double value, std::int32_t a, double da, std::int32_t b, double db) {
    nodes_.push_back(Node{value, da, db, a, b});
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  std::vector<Var> param_vars_;
};

// Sum of a list of nodes, accumulated left to right.
Var sum(Tape& tape, std::span<const Var> terms);

// Mean of squared residuals, recorded on the tape.
Var mse_loss(Tape& tape, std::span<const Var> predictions, std::span<const double> targets);

// Plain mean of squared residuals.
double mse_loss(std::span<const double> predictions, std::span<const double> targets);

// Gradient of `loss` with respect to the registered parameter block.
ParamVector backward(const Tape& tape, Var loss);

}  // namespace l2m
