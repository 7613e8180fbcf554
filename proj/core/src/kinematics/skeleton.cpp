#include "tween/kinematics/skeleton.hpp"

#include <stdexcept>

namespace tween::kin {

Skeleton::Skeleton(std::vector<std::string> names, std::vector<int> parents, std::vector<Vec3> offsets,
                   double frame_rate)
    : names_(std::move(names)), parents_(std::move(parents)), offsets_(std::move(offsets)), frame_rate_(frame_rate) {
  const int n = static_cast<int>(parents_.size());
  if (static_cast<int>(names_.size()) != n || static_cast<int>(offsets_.size()) != n) {
    throw std::invalid_argument("skeleton: names, parents and offsets must have equal length");
  }
  if (n < kLowerCount + 2) {
    throw std::invalid_argument("skeleton: need a hip, 8 lower joints and at least one upper joint, got " +
                                std::to_string(n) + " joints");
  }
  if (!(frame_rate_ > 0.0)) throw std::invalid_argument("skeleton: frame rate must be positive");
  if (parents_[0] != -1) throw std::invalid_argument("skeleton: joint 0 must be the root");
  for (int j = 1; j < n; ++j) {
    if (parents_[j] < 0 || parents_[j] >= j) {
      throw std::invalid_argument("skeleton: joint " + std::to_string(j) + " has parent " +
                                  std::to_string(parents_[j]) + "; parents must precede children");
    }
    if (!(offsets_[j].norm() > 0.0)) {
      throw std::invalid_argument("skeleton: joint '" + names_[j] + "' has a zero-length offset");
    }
  }

  for (int j = 1; j <= kLowerCount; ++j) lower_.push_back(j);
  for (int j = kLowerCount + 1; j < n; ++j) upper_.push_back(j);
  for (int j : upper_) {
    if (parents_[j] >= 1 && parents_[j] <= kLowerCount) {
      throw std::invalid_argument("skeleton: upper joint '" + names_[j] + "' hangs off the lower body");
    }
  }

  // Two leg chains of four joints each, rooted at the hip.
  std::vector<std::vector<int>> chains;
  for (int j : lower_) {
    if (parents_[j] == 0) {
      chains.push_back({j});
    } else if (parents_[j] >= 1 && parents_[j] <= kLowerCount) {
      bool placed = false;
      for (auto& c : chains) {
        if (c.back() == parents_[j]) {
          c.push_back(j);
          placed = true;
          break;
        }
      }
      if (!placed) throw std::invalid_argument("skeleton: lower joints must form unbranched leg chains");
    } else {
      throw std::invalid_argument("skeleton: lower joint '" + names_[j] + "' is not attached to the leg");
    }
  }
  if (chains.size() != 2 || chains[0].size() != 4 || chains[1].size() != 4) {
    throw std::invalid_argument("skeleton: lower body must be two 4-joint leg chains");
  }
  for (const auto& c : chains) {
    for (std::size_t k = 1; k < c.size(); ++k) lower_positional_.push_back(c[k]);
    feet_.push_back(c[2]);
    feet_.push_back(c[3]);
  }
  for (std::size_t s = 0; s < lower_positional_.size(); ++s) {
    const int slot = positional_slot(parents_[lower_positional_[s]]);
    if (slot >= 0) lower_bones_.emplace_back(static_cast<int>(s), slot);
  }
  rotation_orders.assign(n, EulerOrder::ZYX);
  end_sites.assign(n, std::nullopt);
}

int Skeleton::positional_slot(int j) const {
  for (std::size_t s = 0; s < lower_positional_.size(); ++s) {
    if (lower_positional_[s] == j) return static_cast<int>(s);
  }
  return -1;
}

int Skeleton::find(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return static_cast<int>(j);
  }
  return -1;
}

bool Skeleton::same_topology(const Skeleton& other, double tol) const {
  if (parents_ != other.parents_) return false;
  for (std::size_t j = 0; j < offsets_.size(); ++j) {
    if ((offsets_[j] - other.offsets_[j]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

Skeleton Skeleton::lafan_like() {
  std::vector<std::string> names = {"Hips",         "LeftUpLeg",  "LeftLeg",      "LeftFoot",      "LeftToe",
                                    "RightUpLeg",   "RightLeg",   "RightFoot",    "RightToe",      "Spine",
                                    "Spine1",       "Spine2",     "Neck",         "Head",          "LeftShoulder",
                                    "LeftArm",      "LeftForeArm", "LeftHand",    "RightShoulder", "RightArm",
                                    "RightForeArm", "RightHand"};
  std::vector<int> parents = {-1, 0, 1, 2, 3, 0, 5, 6, 7, 0, 9, 10, 11, 12, 11, 14, 15, 16, 11, 18, 19, 20};
  std::vector<Vec3> offsets = {
      {0, 0, 0},     {9, -3, 0},   {0, -42, 0},  {0, -40, 0}, {0, -4, 12}, {-9, -3, 0},  {0, -42, 0}, {0, -40, 0},
      {0, -4, 12},   {0, 8, 0},    {0, 12, 0},   {0, 12, 0},  {0, 14, 0},  {0, 10, 0},   {4, 10, 0},  {14, 0, 0},
      {0, -28, 0},   {0, -25, 0},  {-4, 10, 0},  {-14, 0, 0}, {0, -28, 0}, {0, -25, 0}};
  return Skeleton(std::move(names), std::move(parents), std::move(offsets), 30.0);
}

Skeleton Skeleton::h36m_like() {
  std::vector<std::string> names = {"Hips",         "RightUpLeg",   "RightLeg",      "RightFoot",    "RightToeBase",
                                    "LeftUpLeg",    "LeftLeg",      "LeftFoot",      "LeftToeBase",  "Spine",
                                    "Spine1",       "Neck",         "Head",          "LeftShoulder", "LeftArm",
                                    "LeftForeArm",  "LeftHand",     "RightShoulder", "RightArm",     "RightForeArm",
                                    "RightHand"};
  std::vector<int> parents = {-1, 0, 1, 2, 3, 0, 5, 6, 7, 0, 9, 10, 11, 10, 13, 14, 15, 10, 17, 18, 19};
  std::vector<Vec3> offsets = {{0, 0, 0},   {-13, 0, 0}, {0, -44, 0}, {0, -44, 0}, {0, -5, 13},  {13, 0, 0},
                               {0, -44, 0}, {0, -44, 0}, {0, -5, 13}, {0, 23, 0},  {0, 25, 0},   {0, 7, 0},
                               {0, 12, 0},  {13, 5, 0},  {12, 0, 0},  {0, -25, 0}, {0, -24, 0},  {-13, 5, 0},
                               {-12, 0, 0}, {0, -25, 0}, {0, -24, 0}};
  return Skeleton(std::move(names), std::move(parents), std::move(offsets), 25.0);
}

}  // namespace tween::kin
