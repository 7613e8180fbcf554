#include "tween/kinematics/frame_state.hpp"

#include <stdexcept>

namespace tween::kin {

std::vector<Rotation6D> FrameState::joint_rotations(const Skeleton& skeleton) const {
  check_against(skeleton);
  std::vector<Rotation6D> out(skeleton.joint_count());
  out[0] = r_h;
  for (int k = 0; k < Skeleton::kLowerCount; ++k) out[skeleton.lower()[k]] = r_L[k];
  for (int k = 0; k < skeleton.upper_count(); ++k) out[skeleton.upper()[k]] = r_U[k];
  return out;
}

void FrameState::check_against(const Skeleton& skeleton) const {
  if (static_cast<int>(r_U.size()) != skeleton.upper_count()) {
    throw std::invalid_argument("frame state has " + std::to_string(r_U.size()) + " upper rotations, skeleton has " +
                                std::to_string(skeleton.upper_count()) + " upper joints");
  }
}

void set_joint_rotations(FrameState& s, const Skeleton& skeleton, const std::vector<Rotation6D>& rotations) {
  if (static_cast<int>(rotations.size()) != skeleton.joint_count()) {
    throw std::invalid_argument("expected one rotation per joint");
  }
  s.r_h = rotations[0];
  for (int k = 0; k < Skeleton::kLowerCount; ++k) s.r_L[k] = rotations[skeleton.lower()[k]];
  s.r_U.resize(skeleton.upper_count());
  for (int k = 0; k < skeleton.upper_count(); ++k) s.r_U[k] = rotations[skeleton.upper()[k]];
}

}  // namespace tween::kin
