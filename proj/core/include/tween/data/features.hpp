#pragma once

#include "tween/data/motion_clip.hpp"
#include "tween/kinematics/frame_state.hpp"

#include <memory>
#include <span>
#include <vector>

namespace tween::data {

using kin::FrameState;

/// Ground-plane frame anchored at a hip: horizontal hip position removed and
/// hip heading turned to +Z. Heights are left untouched.
struct CanonicalFrame {
  Vec3 origin = Vec3::Zero();  // y is always 0
  double yaw = 0.0;

  static CanonicalFrame of(const Vec3& hip_position, const Mat3& hip_rotation);

  Vec3 point_to_local(const Vec3& p) const;
  Vec3 point_to_world(const Vec3& p) const;
  Vec3 vector_to_local(const Vec3& v) const;
  Vec3 vector_to_world(const Vec3& v) const;
  Mat3 rotation_to_local(const Mat3& r) const;
  Mat3 rotation_to_world(const Mat3& r) const;
};

/// Root position plus one local rotation per joint (joint 0 global).
struct Pose {
  Vec3 root = Vec3::Zero();
  std::vector<Rotation6D> rotations;
};

/// World joint positions and finite-difference velocities for a whole clip.
/// v[i] = (p[i] - p[i-1]) * rate, with v[0] copied from v[1].
struct ClipKinematics {
  std::vector<std::vector<Vec3>> positions;
  std::vector<std::vector<Vec3>> velocities;
};

ClipKinematics compute_kinematics(const MotionClip& clip);

/// FrameState of one frame given its world pose, world joint positions and
/// velocities, expressed in `frame`.
FrameState make_state(const Skeleton& skeleton, const Pose& pose, std::span<const Vec3> positions,
                      std::span<const Vec3> velocities, const CanonicalFrame& frame);

/// Features of every frame, in the canonical frame of frame 0.
std::vector<FrameState> extract_features(const MotionClip& clip);

/// Features of frames [start, start+length) in the canonical frame of `start`.
std::vector<FrameState> extract_window(const MotionClip& clip, const ClipKinematics& kinematics, std::size_t start,
                                       std::size_t length, CanonicalFrame* frame_out = nullptr);

/// Features of frames [first, first+count) expressed in a given frame.
std::vector<FrameState> extract_frames(const MotionClip& clip, const ClipKinematics& kinematics, std::size_t first,
                                       std::size_t count, const CanonicalFrame& frame);

/// Canonical frame anchored at the hip of frame `f`.
CanonicalFrame frame_at(const MotionClip& clip, std::size_t f);

/// Features of a single pose. Velocities come from `previous` when given
/// (one frame earlier), otherwise they are zero.
FrameState state_from_pose(const Skeleton& skeleton, const Pose& current, const Pose* previous, double frame_rate,
                           const CanonicalFrame& frame);

Pose pose_of(const MotionClip& clip, std::size_t frame);
Pose state_to_pose(const Skeleton& skeleton, const FrameState& state, const CanonicalFrame& frame);

/// World-space clip from canonical-frame states.
MotionClip states_to_clip(std::shared_ptr<const Skeleton> skeleton, std::span<const FrameState> states,
                          const CanonicalFrame& frame);

/// FK positions of a state (world or canonical, matching the state's frame).
std::vector<Vec3> state_positions(const Skeleton& skeleton, const FrameState& state);

/// Re-expresses a state given in `from` in the frame `to`. Rotation fields
/// are transformed column-wise without canonicalizing them.
FrameState rebase(const FrameState& s, const CanonicalFrame& from, const CanonicalFrame& to);

}  // namespace tween::data
