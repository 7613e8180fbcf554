#include "wire.hpp"

#include "tween/version.hpp"

namespace tween::cli {
namespace {

kin::Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw WireError(what + " must be an array of 3 numbers");
  kin::Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) throw WireError(what + " must be an array of 3 numbers");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  if (!v.allFinite()) throw WireError(what + " is not finite");
  return v;
}

json vec_json(const kin::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

data::Pose pose_from_json(const json& j, const kin::Skeleton& skeleton, const std::string& what) {
  if (!j.is_object() || !j.contains("root") || !j.contains("rotations")) {
    throw WireError(what + " needs 'root' and 'rotations'");
  }
  data::Pose p;
  p.root = vec3(j["root"], what + ".root");
  const json& r = j["rotations"];
  if (!r.is_array() || static_cast<int>(r.size()) != skeleton.joint_count()) {
    throw WireError(what + ".rotations must hold " + std::to_string(skeleton.joint_count()) + " entries");
  }
  for (std::size_t k = 0; k < r.size(); ++k) {
    const json& q = r[k];
    if (!q.is_array() || q.size() != 6) throw WireError(what + ".rotations[" + std::to_string(k) + "] must hold 6 numbers");
    std::array<double, 6> a{};
    for (std::size_t i = 0; i < 6; ++i) {
      if (!q[i].is_number()) throw WireError(what + ".rotations[" + std::to_string(k) + "] must hold 6 numbers");
      a[i] = q[i].get<double>();
    }
    const kin::Rotation6D rot = kin::Rotation6D::from_span(a);
    try {
      kin::sixd_to_matrix(rot);
    } catch (const kin::DegenerateRotationError&) {
      throw WireError(what + ".rotations[" + std::to_string(k) + "] is degenerate");
    }
    p.rotations.push_back(rot);
  }
  return p;
}

json pose_to_json(const data::Pose& p) {
  json rots = json::array();
  for (const auto& r : p.rotations) {
    const auto a = r.to_array();
    rots.push_back(json(std::vector<double>(a.begin(), a.end())));
  }
  return json{{"root", vec_json(p.root)}, {"rotations", rots}};
}

engine::Keyframe keyframe_from_json(const json& j, const kin::Skeleton& skeleton, const std::string& what) {
  engine::Keyframe k;
  k.pose = pose_from_json(j, skeleton, what);
  if (j.contains("previous")) k.previous = pose_from_json(j["previous"], skeleton, what + ".previous");
  return k;
}

json skeleton_to_json(const kin::Skeleton& sk) {
  json joints = json::array();
  for (int j = 0; j < sk.joint_count(); ++j) {
    joints.push_back({{"name", sk.names()[j]}, {"parent", sk.parent(j)}, {"offset", vec_json(sk.offset(j))}});
  }
  data::Pose rest{sk.offset(0), std::vector<kin::Rotation6D>(static_cast<std::size_t>(sk.joint_count()))};
  return json{{"header", wire_header(sk)}, {"joints", joints},    {"lower", sk.lower()},
              {"upper", sk.upper()},       {"feet", sk.feet()},    {"rest_pose", pose_to_json(rest)}};
}

json wire_header(const kin::Skeleton& sk) {
  return json{{"version", kVersion},
              {"units", {{"position", "cm"}, {"time", "frames"}, {"rotation", "6d up,forward columns"}}},
              {"frame_rate", sk.frame_rate()},
              {"joint_count", sk.joint_count()}};
}

json frames_to_json(const data::MotionClip& clip) {
  const auto world = clip.world_positions();
  json frames = json::array();
  for (std::size_t f = 0; f < clip.frame_count(); ++f) {
    json pos = json::array();
    for (const auto& p : world[f]) pos.push_back(vec_json(p));
    json rec = pose_to_json(data::Pose{clip.root_positions[f], clip.rotations[f]});
    rec["positions"] = pos;
    frames.push_back(std::move(rec));
  }
  return frames;
}

}  // namespace tween::cli
