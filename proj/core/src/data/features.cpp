#include "tween/data/features.hpp"

#include "tween/kinematics/fk.hpp"

#include <stdexcept>

namespace tween::data {

CanonicalFrame CanonicalFrame::of(const Vec3& hip_position, const Mat3& hip_rotation) {
  return CanonicalFrame{Vec3(hip_position.x(), 0.0, hip_position.z()), kin::yaw_of(hip_rotation)};
}

Vec3 CanonicalFrame::point_to_local(const Vec3& p) const { return kin::yaw_matrix(-yaw) * (p - origin); }
Vec3 CanonicalFrame::point_to_world(const Vec3& p) const { return kin::yaw_matrix(yaw) * p + origin; }
Vec3 CanonicalFrame::vector_to_local(const Vec3& v) const { return kin::yaw_matrix(-yaw) * v; }
Vec3 CanonicalFrame::vector_to_world(const Vec3& v) const { return kin::yaw_matrix(yaw) * v; }
Mat3 CanonicalFrame::rotation_to_local(const Mat3& r) const { return kin::yaw_matrix(-yaw) * r; }
Mat3 CanonicalFrame::rotation_to_world(const Mat3& r) const { return kin::yaw_matrix(yaw) * r; }

ClipKinematics compute_kinematics(const MotionClip& clip) {
  clip.validate(2);
  ClipKinematics k;
  k.positions = clip.world_positions();
  const std::size_t n = clip.frame_count();
  const int joints = clip.skeleton->joint_count();
  k.velocities.assign(n, std::vector<Vec3>(joints, Vec3::Zero()));
  for (std::size_t f = 1; f < n; ++f) {
    for (int j = 0; j < joints; ++j) {
      k.velocities[f][j] = (k.positions[f][j] - k.positions[f - 1][j]) * clip.frame_rate;
    }
  }
  k.velocities[0] = k.velocities[1];
  return k;
}

FrameState make_state(const Skeleton& skeleton, const Pose& pose, std::span<const Vec3> positions,
                      std::span<const Vec3> velocities, const CanonicalFrame& frame) {
  const int joints = skeleton.joint_count();
  if (static_cast<int>(pose.rotations.size()) != joints || static_cast<int>(positions.size()) != joints ||
      static_cast<int>(velocities.size()) != joints) {
    throw std::invalid_argument("make_state: per-joint inputs do not match the skeleton");
  }
  FrameState s;
  s.p_h = frame.point_to_local(positions[0]);
  s.v_h = frame.vector_to_local(velocities[0]);
  std::vector<Rotation6D> rots = pose.rotations;
  rots[0] = kin::matrix_to_sixd(frame.rotation_to_local(kin::sixd_to_matrix(pose.rotations[0])));
  kin::set_joint_rotations(s, skeleton, rots);
  const auto& lp = skeleton.lower_positional();
  for (std::size_t k = 0; k < lp.size(); ++k) {
    s.p_L[k] = frame.point_to_local(positions[lp[k]]);
    s.v_L[k] = frame.vector_to_local(velocities[lp[k]] - velocities[0]);
  }
  return s;
}

Pose pose_of(const MotionClip& clip, std::size_t frame) {
  return Pose{clip.root_positions.at(frame), clip.rotations.at(frame)};
}

CanonicalFrame frame_at(const MotionClip& clip, std::size_t f) {
  return CanonicalFrame::of(clip.root_positions.at(f), kin::sixd_to_matrix(clip.rotations.at(f)[0]));
}

std::vector<FrameState> extract_frames(const MotionClip& clip, const ClipKinematics& kinematics, std::size_t first,
                                       std::size_t count, const CanonicalFrame& frame) {
  if (first + count > clip.frame_count()) throw std::out_of_range("extract_frames: range exceeds clip");
  std::vector<FrameState> out;
  out.reserve(count);
  for (std::size_t f = first; f < first + count; ++f) {
    out.push_back(make_state(*clip.skeleton, pose_of(clip, f), kinematics.positions[f], kinematics.velocities[f], frame));
  }
  return out;
}

std::vector<FrameState> extract_window(const MotionClip& clip, const ClipKinematics& kinematics, std::size_t start,
                                       std::size_t length, CanonicalFrame* frame_out) {
  if (start + length > clip.frame_count()) throw std::out_of_range("extract_window: window exceeds clip");
  const CanonicalFrame frame = frame_at(clip, start);
  if (frame_out != nullptr) *frame_out = frame;
  return extract_frames(clip, kinematics, start, length, frame);
}

std::vector<FrameState> extract_features(const MotionClip& clip) {
  const ClipKinematics k = compute_kinematics(clip);
  return extract_window(clip, k, 0, clip.frame_count());
}

FrameState state_from_pose(const Skeleton& skeleton, const Pose& current, const Pose* previous, double frame_rate,
                           const CanonicalFrame& frame) {
  const std::vector<Vec3> pos = kin::fk(skeleton, current.root, current.rotations);
  std::vector<Vec3> vel(pos.size(), Vec3::Zero());
  if (previous != nullptr) {
    const std::vector<Vec3> prev = kin::fk(skeleton, previous->root, previous->rotations);
    for (std::size_t j = 0; j < pos.size(); ++j) vel[j] = (pos[j] - prev[j]) * frame_rate;
  }
  return make_state(skeleton, current, pos, vel, frame);
}

Pose state_to_pose(const Skeleton& skeleton, const FrameState& state, const CanonicalFrame& frame) {
  Pose p;
  p.root = frame.point_to_world(state.p_h);
  p.rotations = state.joint_rotations(skeleton);
  p.rotations[0] = kin::matrix_to_sixd(frame.rotation_to_world(kin::sixd_to_matrix(state.r_h)));
  return p;
}

MotionClip states_to_clip(std::shared_ptr<const Skeleton> skeleton, std::span<const FrameState> states,
                          const CanonicalFrame& frame) {
  MotionClip clip;
  clip.frame_rate = skeleton->frame_rate();
  for (std::size_t f = 0; f < states.size(); ++f) {
    Pose p;
    try {
      p = state_to_pose(*skeleton, states[f], frame);
    } catch (const kin::DegenerateRotationError& e) {
      throw kin::DegenerateRotationError("frame " + std::to_string(f) + ": " + e.what());
    }
    clip.root_positions.push_back(p.root);
    clip.rotations.push_back(std::move(p.rotations));
  }
  clip.skeleton = std::move(skeleton);
  return clip;
}

std::vector<Vec3> state_positions(const Skeleton& skeleton, const FrameState& state) {
  return kin::fk(skeleton, state.p_h, state.joint_rotations(skeleton));
}

FrameState rebase(const FrameState& s, const CanonicalFrame& from, const CanonicalFrame& to) {
  auto point = [&](const Vec3& p) { return to.point_to_local(from.point_to_world(p)); };
  auto vec = [&](const Vec3& v) { return to.vector_to_local(from.vector_to_world(v)); };
  FrameState r = s;
  r.p_h = point(s.p_h);
  r.v_h = vec(s.v_h);
  r.r_h.up = vec(s.r_h.up);
  r.r_h.forward = vec(s.r_h.forward);
  for (std::size_t k = 0; k < s.p_L.size(); ++k) {
    r.p_L[k] = point(s.p_L[k]);
    r.v_L[k] = vec(s.v_L[k]);
  }
  return r;
}

}  // namespace tween::data
