#include "tween/autodiff/layers.hpp"

#include <cmath>

namespace tween::ad {

void init_uniform(Tensor& w, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Index k = 0; k < w.size(); ++k) w.data()[k] = dist(rng);
}

void init_glorot_uniform(Tensor& w, Rng& rng) {
  init_uniform(w, std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())), rng);
}

Linear::Linear(ParameterSet& params, const std::string& name, Index in, Index out, Rng& rng)
    : in_(in), out_(out) {
  weight_ = params.add(name + ".weight", in, out);
  bias_ = params.add(name + ".bias", 1, out);
  init_glorot_uniform(params[weight_].value, rng);
}

Var Linear::operator()(Binding& bind, Var x) const {
  if (x.cols() != in_) {
    throw ShapeError("linear layer expects " + std::to_string(in_) + " inputs, got " + std::to_string(x.cols()));
  }
  return add_row(matmul(x, bind(weight_)), bind(bias_));
}

Mlp::Mlp(ParameterSet& params, const std::string& name, Index in, const std::vector<Index>& hidden, Index out,
         Activation hidden_act, Activation out_act, Rng& rng)
    : hidden_act_(hidden_act), out_act_(out_act) {
  Index prev = in;
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    layers_.emplace_back(params, name + ".l" + std::to_string(k), prev, hidden[k], rng);
    prev = hidden[k];
  }
  layers_.emplace_back(params, name + ".out", prev, out, rng);
}

Var Mlp::operator()(Binding& bind, Var x) const {
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) x = activate(hidden_act_, layers_[k](bind, x));
  return activate(out_act_, layers_.back()(bind, x));
}

Lstm::Lstm(ParameterSet& params, const std::string& name, Index in, Index hidden, Rng& rng)
    : in_(in), hidden_(hidden) {
  wx_ = params.add(name + ".wx", in, 4 * hidden);
  wh_ = params.add(name + ".wh", hidden, 4 * hidden);
  b_ = params.add(name + ".bias", 1, 4 * hidden);
  init_glorot_uniform(params[wx_].value, rng);
  init_uniform(params[wh_].value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  // Forget gate starts open.
  params[b_].value.middleCols(hidden, hidden).setOnes();
}

LstmState Lstm::operator()(Binding& bind, Var x, const LstmState& state) const {
  return lstm_cell(x, state, bind(wx_), bind(wh_), bind(b_));
}

LstmState Lstm::zero_state(Tape& tape, Index batch) const {
  return LstmState{tape.constant(Tensor::Zero(batch, hidden_)), tape.constant(Tensor::Zero(batch, hidden_))};
}

}  // namespace tween::ad
