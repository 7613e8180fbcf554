#pragma once

#include "tween/autodiff/checkpoint.hpp"
#include "tween/kinematics/frame_state.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace tween::data {

/// Per-dimension z-score statistics of the lower-joint positions p_L.
struct NormStats {
  static constexpr std::size_t kDims = 3 * kin::Skeleton::kLowerPositionalCount;

  std::array<double, kDims> mean{};
  std::array<double, kDims> std{};

  NormStats() { std.fill(1.0); }

  /// Dimensions whose spread is (near) zero get std = 1 and are reported in
  /// `degenerate` when given.
  static NormStats compute(std::span<const kin::FrameState> states, std::vector<std::size_t>* degenerate = nullptr);

  std::array<double, kDims> normalize(const kin::FrameState& s) const;
  std::array<double, kDims> normalize(std::span<const double> p) const;
  std::array<double, kDims> denormalize(std::span<const double> z) const;

  void put(ad::Checkpoint& ck, const std::string& prefix) const;
  static NormStats get(const ad::Checkpoint& ck, const std::string& prefix);
};

}  // namespace tween::data
