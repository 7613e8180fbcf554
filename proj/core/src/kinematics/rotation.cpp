#include "tween/kinematics/rotation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tween::kin {

Rotation6D Rotation6D::from_span(std::span<const double> v) {
  if (v.size() < 6) throw std::invalid_argument("Rotation6D needs 6 values");
  return Rotation6D{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
}

void Rotation6D::write_to(std::span<double> out) const {
  if (out.size() < 6) throw std::invalid_argument("Rotation6D needs 6 output slots");
  out[0] = up.x();
  out[1] = up.y();
  out[2] = up.z();
  out[3] = forward.x();
  out[4] = forward.y();
  out[5] = forward.z();
}

Mat3 sixd_to_matrix(const Rotation6D& r) {
  const double a = r.up.norm();
  if (!(a > kDegenerateNorm)) throw DegenerateRotationError("rotation up axis is (near) zero");
  const Vec3 y = r.up / a;
  const Vec3 w = r.forward - r.forward.dot(y) * y;
  const double b = w.norm();
  if (!(b > kDegenerateNorm)) throw DegenerateRotationError("rotation forward axis is zero or parallel to up");
  const Vec3 z = w / b;
  Mat3 m;
  m.col(0) = y.cross(z);
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

std::array<double, 6> sixd_to_matrix_backward(const Rotation6D& r, const Mat3& grad) {
  const double a = r.up.norm();
  if (!(a > kDegenerateNorm)) throw DegenerateRotationError("rotation up axis is (near) zero");
  const Vec3 y = r.up / a;
  const double s = r.forward.dot(y);
  const Vec3 w = r.forward - s * y;
  const double b = w.norm();
  if (!(b > kDegenerateNorm)) throw DegenerateRotationError("rotation forward axis is zero or parallel to up");
  const Vec3 z = w / b;

  const Vec3 dx = grad.col(0);
  Vec3 dy = grad.col(1) + z.cross(dx);
  const Vec3 dz = grad.col(2) + dx.cross(y);

  const Vec3 dw = (dz - z * z.dot(dz)) / b;
  // w = f - s y, s = f . y
  const double ds = -y.dot(dw);
  const Vec3 df = dw + ds * y;
  dy += -s * dw + ds * r.forward;
  const Vec3 du = (dy - y * y.dot(dy)) / a;
  return {du.x(), du.y(), du.z(), df.x(), df.y(), df.z()};
}

Rotation6D matrix_to_sixd(const Mat3& m) {
  const double err = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-6)) {
    throw std::invalid_argument("matrix_to_sixd: matrix is not orthonormal (deviation " + std::to_string(err) + ")");
  }
  return Rotation6D{m.col(1), m.col(2)};
}

Rotation6D add_rotation_delta(const Rotation6D& r, std::span<const double> delta) {
  if (delta.size() != 6) throw std::invalid_argument("rotation delta must have 6 components");
  return Rotation6D{r.up + Vec3(delta[0], delta[1], delta[2]), r.forward + Vec3(delta[3], delta[4], delta[5])};
}

Rotation6D canonicalize(const Rotation6D& r) {
  const Mat3 m = sixd_to_matrix(r);
  return Rotation6D{m.col(1), m.col(2)};
}

Mat3 yaw_matrix(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix(); }

double yaw_of(const Mat3& m) {
  const Vec3 f = m.col(2);
  if (std::hypot(f.x(), f.z()) < 1e-9) {
    // Forward points straight up or down; fall back to the up axis heading.
    const Vec3 u = m.col(1);
    return std::atan2(-u.x() * f.y(), -u.z() * f.y());
  }
  return std::atan2(f.x(), f.z());
}

Eigen::Quaterniond to_quaternion(const Rotation6D& r) {
  Eigen::Quaterniond q(sixd_to_matrix(r));
  q.normalize();
  return q;
}

Rotation6D from_quaternion(const Eigen::Quaterniond& q) {
  const Mat3 m = q.normalized().toRotationMatrix();
  return Rotation6D{m.col(1), m.col(2)};
}

}  // namespace tween::kin
