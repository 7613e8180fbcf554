#include "tween/autodiff/amsgrad.hpp"

namespace tween::ad {

Amsgrad::Amsgrad(const ParameterSet& params, AmsgradConfig config) : config_(config) {
  moments_.reserve(params.size());
  for (const auto& p : params) {
    const Index r = p.value.rows();
    const Index c = p.value.cols();
    moments_.push_back(Moments{Tensor::Zero(r, c), Tensor::Zero(r, c), Tensor::Zero(r, c)});
  }
}

void Amsgrad::step(ParameterSet& params, double learning_rate) {
  if (params.size() != moments_.size()) {
    throw ShapeError("optimizer state covers " + std::to_string(moments_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    Moments& s = moments_[k];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() || s.m.rows() != p.value.rows() ||
        s.m.cols() != p.value.cols()) {
      throw ShapeError("optimizer: shape mismatch for parameter '" + p.name + "'");
    }
    s.m = b1 * s.m + (1.0 - b1) * p.grad;
    s.v = b2 * s.v + (1.0 - b2) * p.grad.cwiseProduct(p.grad);
    s.vhat = s.vhat.cwiseMax(s.v);
    p.value.array() -= learning_rate * s.m.array() / (s.vhat.array().sqrt() + config_.epsilon);
  }
  ++t_;
}

}  // namespace tween::ad
