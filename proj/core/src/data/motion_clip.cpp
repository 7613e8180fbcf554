#include "tween/data/motion_clip.hpp"

#include "tween/kinematics/fk.hpp"

#include <stdexcept>

namespace tween::data {

void MotionClip::validate(std::size_t min_frames) const {
  if (!skeleton) throw std::invalid_argument("clip '" + name + "' has no skeleton");
  if (frame_count() < min_frames) {
    throw std::invalid_argument("clip '" + name + "' has " + std::to_string(frame_count()) + " frames, need at least " +
                                std::to_string(min_frames));
  }
  if (!(frame_rate > 0.0)) throw std::invalid_argument("clip '" + name + "' has a non-positive frame rate");
  if (rotations.size() != frame_count()) throw std::invalid_argument("clip '" + name + "' rotation/frame count mismatch");
  for (std::size_t f = 0; f < rotations.size(); ++f) {
    if (static_cast<int>(rotations[f].size()) != skeleton->joint_count()) {
      throw std::invalid_argument("clip '" + name + "' frame " + std::to_string(f) + " has the wrong joint count");
    }
    for (const auto& r : rotations[f]) {
      try {
        (void)kin::sixd_to_matrix(r);
      } catch (const kin::DegenerateRotationError& e) {
        throw std::invalid_argument("clip '" + name + "' frame " + std::to_string(f) + ": " + e.what());
      }
    }
  }
}

std::vector<std::vector<Vec3>> MotionClip::world_positions() const {
  std::vector<std::vector<Vec3>> out;
  out.reserve(frame_count());
  for (std::size_t f = 0; f < frame_count(); ++f) out.push_back(kin::fk(*skeleton, root_positions[f], rotations[f]));
  return out;
}

}  // namespace tween::data
