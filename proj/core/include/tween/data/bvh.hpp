#pragma once

#include "tween/data/motion_clip.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tween::data {

class BvhError : public std::runtime_error {
 public:
  BvhError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Rotation for a BVH channel triple, angles in degrees applied in the listed
/// order (e.g. ZYX gives Rz * Ry * Rx).
Mat3 euler_to_matrix(kin::EulerOrder order, const Vec3& degrees);
/// Inverse of euler_to_matrix; returns angles in the channel order.
Vec3 matrix_to_euler(kin::EulerOrder order, const Mat3& m);

/// Parses BVH text. Root: Xposition Yposition Zposition followed by three
/// rotation channels; other joints: three rotation channels. Rotation
/// channel orders ZYX and ZXY are supported. Offsets are taken as cm.
MotionClip parse_bvh(std::string_view text, std::string name = {});
MotionClip load_bvh(const std::filesystem::path& path);

std::string write_bvh(const MotionClip& clip);
void save_bvh(const std::filesystem::path& path, const MotionClip& clip);

}  // namespace tween::data
