#pragma once

#include "tween/kinematics/skeleton.hpp"

#include <array>
#include <vector>

namespace tween::kin {

/// One frame in the engine's feature representation, expressed in a
/// canonical frame (see data/features.hpp).
///
///   p_h, v_h   hip position and velocity (cm, cm/s)
///   r_h        hip orientation
///   p_L        positions of the six positional lower joints (cm)
///   v_L        their velocities relative to the hip (cm/s)
///   r_L        local rotations of the eight lower joints
///   r_U        local rotations of the upper joints
struct FrameState {
  Vec3 p_h = Vec3::Zero();
  Rotation6D r_h;
  Vec3 v_h = Vec3::Zero();
  std::array<Vec3, Skeleton::kLowerPositionalCount> p_L{};
  std::array<Vec3, Skeleton::kLowerPositionalCount> v_L{};
  std::array<Rotation6D, Skeleton::kLowerCount> r_L{};
  std::vector<Rotation6D> r_U;

  /// Local rotations for every joint in skeleton order.
  std::vector<Rotation6D> joint_rotations(const Skeleton& skeleton) const;
  /// Throws std::invalid_argument if the upper-body count does not match.
  void check_against(const Skeleton& skeleton) const;
};

/// Assembles a FrameState's rotation fields from per-joint rotations.
void set_joint_rotations(FrameState& s, const Skeleton& skeleton, const std::vector<Rotation6D>& rotations);

}  // namespace tween::kin
