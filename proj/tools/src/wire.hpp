#pragma once

#include "tween/engine/engine.hpp"

#include "json.hpp"

#include <string>

namespace tween::cli {

using nlohmann::json;

/// Request content that is well-formed JSON but does not describe a valid
/// pose or request (maps to HTTP 400).
class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"root": [x, y, z], "rotations": [[6 numbers] per joint]}; cm, 6D as
/// (up, forward) columns, joint 0 global.
data::Pose pose_from_json(const json& j, const kin::Skeleton& skeleton, const std::string& what);
json pose_to_json(const data::Pose& p);
/// Pose with an optional "previous" pose for velocities.
engine::Keyframe keyframe_from_json(const json& j, const kin::Skeleton& skeleton, const std::string& what);

json skeleton_to_json(const kin::Skeleton& skeleton);
/// Header block naming units and format.
json wire_header(const kin::Skeleton& skeleton);
/// One record per frame: root, per-joint world positions and local rotations.
json frames_to_json(const data::MotionClip& clip);

}  // namespace tween::cli
