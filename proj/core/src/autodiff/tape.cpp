#include "tween/autodiff/tape.hpp"

#include <utility>

namespace tween::ad {

std::size_t ParameterSet::add(std::string name, Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw ShapeError("parameter '" + name + "' must have positive dimensions");
  }
  if (find(name) != nullptr) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  params_.push_back(Parameter{std::move(name), Tensor::Zero(rows, cols), Tensor::Zero(rows, cols)});
  return params_.size() - 1;
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
    if (a.value != b.value) return false;
  }
  return true;
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::push_node(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push_node(std::move(n));
}

Var Tape::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push_node(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  return push_node(std::move(n));
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Tensor::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::push(const char* op, Tensor value, std::initializer_list<int> inputs, BackwardFn fn) {
  return push(op, std::move(value), std::vector<int>(inputs), std::move(fn));
}

Var Tape::push(const char* op, Tensor value, const std::vector<int>& inputs, BackwardFn fn) {
  if (!value.allFinite()) {
    throw NonFiniteError(std::string("non-finite value produced by '") + op + "' at tape node " +
                         std::to_string(nodes_.size()));
  }
  Node n;
  n.value = std::move(value);
  for (int id : inputs) {
    if (nodes_[id].requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push_node(std::move(n));
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("loss belongs to a different tape");
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got " + shape_str(lv));
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[loss.id].grad = Tensor::Ones(1, 1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      if (n.param->grad.rows() != n.grad.rows() || n.param->grad.cols() != n.grad.cols()) {
        n.param->grad.setZero(n.grad.rows(), n.grad.cols());
      }
      n.param->grad += n.grad;
    }
  }
}

void Tape::clear() { nodes_.clear(); }

Binding::Binding(Tape& tape, ParameterSet& params)
    : tape_(&tape), params_(&params), mutable_params_(&params), leaves_(params.size(), -1) {}

Binding::Binding(Tape& tape, const ParameterSet& params)
    : tape_(&tape), params_(&params), leaves_(params.size(), -1) {}

Var Binding::operator()(std::size_t index) {
  int& leaf = leaves_.at(index);
  if (leaf < 0) {
    Var v = mutable_params_ != nullptr ? tape_->param((*mutable_params_)[index])
                                       : tape_->constant((*params_)[index].value);
    leaf = v.id;
  }
  return Var{tape_, leaf};
}

}  // namespace tween::ad
