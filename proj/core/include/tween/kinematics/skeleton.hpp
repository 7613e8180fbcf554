#pragma once

#include "tween/kinematics/rotation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tween::kin {

enum class EulerOrder { ZYX, ZXY };

/// Joint hierarchy with local offsets in centimeters.
///
/// Body partition: joint 0 is the hip, joints 1..8 form the lower body
/// (two legs of four joints each), all remaining joints are upper body.
/// Lower joints attached directly to the hip keep their rotation but carry no
/// position/velocity features, since the hip rotation determines them.
class Skeleton {
 public:
  static constexpr int kLowerCount = 8;
  static constexpr int kLowerPositionalCount = 6;

  Skeleton() = default;
  /// Validates topology and derives the partition. Throws std::invalid_argument.
  Skeleton(std::vector<std::string> names, std::vector<int> parents, std::vector<Vec3> offsets, double frame_rate);

  int joint_count() const { return static_cast<int>(parents_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& parents() const { return parents_; }
  const std::vector<Vec3>& offsets() const { return offsets_; }
  int parent(int j) const { return parents_[j]; }
  const Vec3& offset(int j) const { return offsets_[j]; }
  double frame_rate() const { return frame_rate_; }
  double frame_time() const { return 1.0 / frame_rate_; }

  /// Joints 1..8.
  const std::vector<int>& lower() const { return lower_; }
  /// Joints 9..J-1.
  const std::vector<int>& upper() const { return upper_; }
  int upper_count() const { return static_cast<int>(upper_.size()); }
  /// The six lower joints that carry position/velocity features.
  const std::vector<int>& lower_positional() const { return lower_positional_; }
  /// Last two joints of each leg chain (ankle and toe), ordered by leg.
  const std::vector<int>& feet() const { return feet_; }
  /// (child, parent) pairs among lower_positional joints; indices are slots in
  /// lower_positional().
  const std::vector<std::pair<int, int>>& lower_bones() const { return lower_bones_; }
  /// Slot of joint `j` in lower_positional(), or -1.
  int positional_slot(int j) const;

  int find(const std::string& name) const;

  // BVH round-trip metadata.
  std::vector<EulerOrder> rotation_orders;
  std::vector<std::optional<Vec3>> end_sites;

  bool same_topology(const Skeleton& other, double tol = 1e-9) const;

  /// 22-joint rig (LaFAN1 layout), 30 Hz.
  static Skeleton lafan_like();
  /// 21-joint rig (Human3.6M layout without wrists/thumbs), 25 Hz.
  static Skeleton h36m_like();

 private:
  std::vector<std::string> names_;
  std::vector<int> parents_;
  std::vector<Vec3> offsets_;
  double frame_rate_ = 30.0;
  std::vector<int> lower_;
  std::vector<int> upper_;
  std::vector<int> lower_positional_;
  std::vector<int> feet_;
  std::vector<std::pair<int, int>> lower_bones_;
};

}  // namespace tween::kin
