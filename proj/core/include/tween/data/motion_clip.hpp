#pragma once

#include "tween/kinematics/skeleton.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tween::data {

using kin::Mat3;
using kin::Rotation6D;
using kin::Skeleton;
using kin::Vec3;

/// A root trajectory plus local joint rotations per frame.
struct MotionClip {
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<Vec3> root_positions;
  std::vector<std::vector<Rotation6D>> rotations;  // [frame][joint]
  double frame_rate = 30.0;
  std::string subject;
  std::string name;

  std::size_t frame_count() const { return root_positions.size(); }

  /// Throws std::invalid_argument unless the clip has >= `min_frames` frames,
  /// one canonicalizable rotation per joint per frame, and a positive rate.
  void validate(std::size_t min_frames = 2) const;

  /// World position of every joint, per frame.
  std::vector<std::vector<Vec3>> world_positions() const;
};

}  // namespace tween::data
