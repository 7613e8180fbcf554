#pragma once

#include "tween/autodiff/ops.hpp"
#include "tween/kinematics/frame_state.hpp"

#include <span>
#include <vector>

namespace tween::manifold {

using ad::Index;
using ad::Tensor;
using ad::Var;
using kin::FrameState;

/// Velocities enter and leave the networks in m/s; FrameState holds cm/s.
inline constexpr double kVelocityScale = 0.01;

inline constexpr Index kVhDim = 3;
inline constexpr Index kVLDim = 3 * kin::Skeleton::kLowerPositionalCount;  // 18
inline constexpr Index kRhDim = 6;
inline constexpr Index kRLDim = 6 * kin::Skeleton::kLowerCount;  // 48
inline constexpr Index kPLDim = kVLDim;
inline constexpr Index kConditionDim = kVhDim + kVLDim + kRhDim + kRLDim;  // 75
inline constexpr Index kDecoderOutputDim = kVLDim + kRLDim + kRhDim;      // 72

/// A batch of FrameStates, one row per sample.
struct StateBatch {
  Tensor p_h, r_h, v_h, p_L, v_L, r_L, r_U;

  Index batch() const { return p_h.rows(); }
  static StateBatch pack(std::span<const FrameState* const> states);
  static StateBatch pack(std::span<const FrameState> states);
  FrameState unpack(Index row) const;
};

/// The same fields as tape variables.
struct StateVars {
  Var p_h, r_h, v_h, p_L, v_L, r_L, r_U;

  static StateVars constant(ad::Tape& tape, const StateBatch& b);
  StateBatch values() const;
};

/// Manifold condition [v_h, v_L, r_h, r_L] with velocities in m/s.
Var condition(const StateVars& s);
Tensor condition(const StateBatch& s);

/// (B x 3) -> (B x 3k) by repeating the columns k times.
Var tile3(Var v, int k);

}  // namespace tween::manifold
