#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>
#include <stdexcept>

namespace tween::kin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class DegenerateRotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis convention: Y up, Z forward, right-handed. A rotation matrix has
/// columns (side, up, forward) with side = up x forward.
inline constexpr double kDegenerateNorm = 1e-6;

/// Two-axis rotation: the up and forward columns of a rotation matrix. Any
/// six numbers are a legal value; they are orthonormalized on conversion.
struct Rotation6D {
  Vec3 up = Vec3::UnitY();
  Vec3 forward = Vec3::UnitZ();

  static Rotation6D identity() { return {}; }

  std::array<double, 6> to_array() const { return {up.x(), up.y(), up.z(), forward.x(), forward.y(), forward.z()}; }
  static Rotation6D from_span(std::span<const double> v);
  void write_to(std::span<double> out) const;

  bool operator==(const Rotation6D&) const = default;
};

/// Normalize up, Gram-Schmidt forward against it, side by cross product.
/// Throws DegenerateRotationError for near-zero or parallel axes.
Mat3 sixd_to_matrix(const Rotation6D& r);

/// Throws std::invalid_argument if `m` is not orthonormal within 1e-6.
Rotation6D matrix_to_sixd(const Mat3& m);

/// Componentwise addition in 6D space. No canonicalization happens here.
Rotation6D add_rotation_delta(const Rotation6D& r, std::span<const double> delta);

/// Re-expresses `r` as the 6D pair of its orthonormalized matrix.
Rotation6D canonicalize(const Rotation6D& r);

/// Rotation about +Y by `angle` radians; +90 deg takes +Z to +X.
Mat3 yaw_matrix(double angle);
/// Heading of the forward column projected on the ground plane.
double yaw_of(const Mat3& m);

Eigen::Quaterniond to_quaternion(const Rotation6D& r);
Rotation6D from_quaternion(const Eigen::Quaterniond& q);

/// Backward pass of sixd_to_matrix: given dL/dR, returns dL/d(up, forward)
/// for the raw (unnormalized) inputs.
std::array<double, 6> sixd_to_matrix_backward(const Rotation6D& r, const Mat3& grad);

}  // namespace tween::kin
