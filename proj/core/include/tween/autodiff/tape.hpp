#pragma once

#include "tween/autodiff/tensor.hpp"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace tween::ad {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Owns named parameters with stable indices. Copying deep-copies values, so
/// a copy is an independent snapshot.
class ParameterSet {
 public:
  ParameterSet() = default;

  std::size_t add(std::string name, Index rows, Index cols);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();

  bool operator==(const ParameterSet& other) const;

 private:
  std::vector<Parameter> params_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while the tape lives
/// and has not been cleared.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// vector is already a topological order and backward is a single reverse
/// sweep.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Non-differentiable value.
  Var constant(Tensor value);
  /// Differentiable leaf that is not tied to a parameter (gradient checks,
  /// inputs whose gradient is inspected).
  Var input(Tensor value);
  /// Leaf bound to a parameter; backward accumulates into param.grad.
  Var param(Parameter& p);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& value(int id) const { return nodes_[id].value; }
  /// Gradient of the last backward pass (zeros if the node was not reached).
  Tensor grad(Var v) const;

  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape once in reverse.
  void backward(Var loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  // Op-author interface.
  Var push(const char* op, Tensor value, std::initializer_list<int> inputs, BackwardFn fn);
  Var push(const char* op, Tensor value, const std::vector<int>& inputs, BackwardFn fn);
  const Tensor& grad_of(int id) const { return nodes_[id].grad; }
  /// Adds `delta` into the gradient of `id` if it requires one.
  template <typename Expr>
  void accumulate(int id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
    } else {
      n.grad += delta;
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Var push_node(Node node);

  std::vector<Node> nodes_;
};

/// Binds a parameter set to a tape for one forward pass. Each parameter gets
/// at most one leaf node, so a weight reused across time steps accumulates
/// its gradient on a single node. A frozen binding inserts weights as
/// constants: gradients still flow through the layer to its inputs.
class Binding {
 public:
  /// Trainable binding.
  Binding(Tape& tape, ParameterSet& params);
  /// Frozen binding.
  Binding(Tape& tape, const ParameterSet& params);

  Var operator()(std::size_t index);
  Tape& tape() { return *tape_; }
  bool trainable() const { return mutable_params_ != nullptr; }

 private:
  Tape* tape_;
  const ParameterSet* params_;
  ParameterSet* mutable_params_ = nullptr;
  std::vector<int> leaves_;
};

}  // namespace tween::ad
