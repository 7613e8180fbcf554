#pragma once

#include "tween/autodiff/ops.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tween::ad {

using Rng = std::mt19937_64;

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_glorot_uniform(Tensor& w, Rng& rng);
/// Uniform in +-limit.
void init_uniform(Tensor& w, double limit, Rng& rng);

/// Dense layer y = x W + b. Holds indices into a ParameterSet so models stay
/// copyable values.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, Index in, Index out, Rng& rng);

  Var operator()(Binding& bind, Var x) const;

  Index in() const { return in_; }
  Index out() const { return out_; }
  std::size_t weight_index() const { return weight_; }
  std::size_t bias_index() const { return bias_; }

 private:
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
  Index in_ = 0;
  Index out_ = 0;
};

/// Stack of Linear layers with one activation after every hidden layer and a
/// (possibly different) activation on the output.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet& params, const std::string& name, Index in, const std::vector<Index>& hidden, Index out,
      Activation hidden_act, Activation out_act, Rng& rng);

  Var operator()(Binding& bind, Var x) const;

  const std::vector<Linear>& layers() const { return layers_; }
  Activation hidden_activation() const { return hidden_act_; }
  Activation output_activation() const { return out_act_; }

 private:
  std::vector<Linear> layers_;
  Activation hidden_act_ = Activation::Elu;
  Activation out_act_ = Activation::Identity;
};

class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterSet& params, const std::string& name, Index in, Index hidden, Rng& rng);

  LstmState operator()(Binding& bind, Var x, const LstmState& state) const;
  LstmState zero_state(Tape& tape, Index batch) const;

  Index in() const { return in_; }
  Index hidden() const { return hidden_; }
  std::size_t wx_index() const { return wx_; }
  std::size_t wh_index() const { return wh_; }
  std::size_t bias_index() const { return b_; }

 private:
  std::size_t wx_ = 0;
  std::size_t wh_ = 0;
  std::size_t b_ = 0;
  Index in_ = 0;
  Index hidden_ = 0;
};

}  // namespace tween::ad
