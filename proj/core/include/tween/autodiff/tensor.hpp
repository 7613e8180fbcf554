#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace tween::ad {

/// Dense row-major matrix of doubles. Vectors are stored as 1 x n rows and
/// batches as one sample per row, so every layer sees (batch x features).
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using TensorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a forward value becomes NaN or infinite. Training steps abort
/// on this rather than letting the value propagate.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

}  // namespace tween::ad
