#pragma once

#include "tween/data/motion_clip.hpp"

#include <cstdint>
#include <memory>

namespace tween::data {

/// Knobs of the procedural walker. Speeds in cm/s, angles in radians,
/// periods in seconds.
struct GaitParams {
  double base_speed = 100.0;
  double speed_amplitude = 30.0;
  double speed_period = 7.0;
  double turn_amplitude = 0.35;  // peak turn rate, rad/s
  double turn_period = 9.0;
  double step_height = 9.0;
  double stance_fraction = 0.6;
  double arm_swing = 0.35;
  double pelvis_twist = 0.08;
  double phase = 0.0;  // offsets of the periodic modulations
};

/// Draws a plausible parameter set.
GaitParams random_gait(std::uint64_t seed);

/// Walking clip with planted feet: hip path with turns and speed changes,
/// analytic two-bone leg IK towards footstep targets, flat feet, arm swing
/// opposite the legs. Works for any rig with the standard leg layout whose
/// upper body names arms "LeftArm"/"RightArm" and spine joints "Spine*".
MotionClip generate_walk(std::shared_ptr<const Skeleton> skeleton, std::size_t frames, const GaitParams& params);

}  // namespace tween::data
