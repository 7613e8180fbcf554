#pragma once

#include "tween/autodiff/tape.hpp"

#include <cstdint>
#include <vector>

namespace tween::ad {

struct AmsgradConfig {
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

/// AMSgrad without bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,  vhat <- max(vhat, v),
///   theta <- theta - lr m / (sqrt(vhat) + eps).
class Amsgrad {
 public:
  Amsgrad() = default;
  Amsgrad(const ParameterSet& params, AmsgradConfig config = {});

  void step(ParameterSet& params, double learning_rate);

  std::uint64_t steps() const { return t_; }
  const AmsgradConfig& config() const { return config_; }

  struct Moments {
    Tensor m;
    Tensor v;
    Tensor vhat;
  };
  const std::vector<Moments>& moments() const { return moments_; }
  std::vector<Moments>& moments() { return moments_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  AmsgradConfig config_;
  std::vector<Moments> moments_;
  std::uint64_t t_ = 0;
};

}  // namespace tween::ad
