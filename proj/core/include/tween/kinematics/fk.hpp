#pragma once

#include "tween/autodiff/tape.hpp"
#include "tween/kinematics/skeleton.hpp"

#include <span>
#include <vector>

namespace tween::kin {

/// World positions from the root position and one local rotation per joint
/// (joint 0's rotation is its global orientation).
std::vector<Vec3> fk(const Skeleton& skeleton, const Vec3& root, std::span<const Mat3> rotations);
std::vector<Vec3> fk(const Skeleton& skeleton, const Vec3& root, std::span<const Rotation6D> rotations);

/// Global orientation of every joint.
std::vector<Mat3> global_rotations(const Skeleton& skeleton, std::span<const Mat3> rotations);

/// p_next = p + v * dt.
Vec3 integrate_root(const Vec3& position, const Vec3& velocity, double dt);

/// Batched differentiable FK. `root` is (B x 3), `rotations` is (B x 6J) raw
/// 6D values in joint order; the result is (B x 3J) world positions.
ad::Var fk(const Skeleton& skeleton, ad::Var root, ad::Var rotations);

}  // namespace tween::kin
