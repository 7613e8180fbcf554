#include "tween/data/procedural.hpp"

#include "tween/kinematics/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tween::data {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMargin = 60;
constexpr double kToeClearance = 1.0;

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }

// Frame whose -Y axis points along `dir` and whose Z axis is `fwd` made
// orthogonal to it.
Mat3 bone_basis(const Vec3& dir, const Vec3& fwd) {
  const Vec3 y = -dir.normalized();
  Vec3 z = fwd - fwd.dot(y) * y;
  if (z.norm() < 1e-9) z = y.unitOrthogonal();
  z.normalize();
  Mat3 m;
  m.col(0) = y.cross(z);
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

struct Leg {
  int c0, c1, c2, c3;
  double side;  // +1 left, -1 right, by name
};

}  // namespace

GaitParams random_gait(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  GaitParams p;
  p.base_speed = uni(80.0, 120.0);
  p.speed_amplitude = uni(15.0, 40.0);
  p.speed_period = uni(5.0, 9.0);
  p.turn_amplitude = uni(0.2, 0.5);
  p.turn_period = uni(6.0, 12.0);
  p.step_height = uni(7.0, 11.0);
  p.stance_fraction = uni(0.57, 0.63);
  p.arm_swing = uni(0.25, 0.45);
  p.pelvis_twist = uni(0.05, 0.1);
  p.phase = uni(0.0, kTwoPi);
  return p;
}

MotionClip generate_walk(std::shared_ptr<const Skeleton> skeleton, std::size_t frames, const GaitParams& gp) {
  if (frames < 2) throw std::invalid_argument("generate_walk: need at least 2 frames");
  const Skeleton& sk = *skeleton;
  const double dt = sk.frame_time();
  const std::size_t total = frames + 2 * kMargin;

  std::vector<Leg> legs;
  for (std::size_t k = 0; k < sk.feet().size(); k += 2) {
    Leg l{};
    l.c2 = sk.feet()[k];
    l.c3 = sk.feet()[k + 1];
    l.c1 = sk.parent(l.c2);
    l.c0 = sk.parent(l.c1);
    l.side = sk.names()[l.c0].find("Right") != std::string::npos ? -1.0 : 1.0;
    legs.push_back(l);
  }

  // Hip path, heading and gait phase.
  std::vector<Vec3> hip(total, Vec3::Zero());
  std::vector<double> heading(total, 0.0);
  std::vector<double> speed(total, 0.0);
  std::vector<double> phase(total, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    const double t = static_cast<double>(i) * dt;
    speed[i] = std::max(35.0, gp.base_speed + gp.speed_amplitude * std::sin(kTwoPi * t / gp.speed_period + gp.phase));
    if (i + 1 < total) {
      const double turn = gp.turn_amplitude * std::sin(kTwoPi * t / gp.turn_period + 1.7 * gp.phase) +
                          0.5 * gp.turn_amplitude * std::sin(kTwoPi * t / (0.37 * gp.turn_period) + 0.3 * gp.phase);
      heading[i + 1] = heading[i] + turn * dt;
      hip[i + 1] = hip[i] + speed[i] * dt * Vec3(std::sin(heading[i]), 0.0, std::cos(heading[i]));
      phase[i + 1] = phase[i] + (0.6 + 0.003 * speed[i]) * dt;
    }
  }

  auto sample = [&](const std::vector<double>& v, double x) {
    x = std::clamp(x, 0.0, static_cast<double>(total - 1));
    const auto i = static_cast<std::size_t>(std::floor(x));
    const std::size_t j = std::min(i + 1, total - 1);
    const double a = x - static_cast<double>(i);
    return (1.0 - a) * v[i] + a * v[j];
  };
  auto sample_hip = [&](double x) {
    x = std::clamp(x, 0.0, static_cast<double>(total - 1));
    const auto i = static_cast<std::size_t>(std::floor(x));
    const std::size_t j = std::min(i + 1, total - 1);
    const double a = x - static_cast<double>(i);
    return Vec3((1.0 - a) * hip[i] + a * hip[j]);
  };
  // Fractional frame at which the leg's phase reaches `target`.
  auto time_of_phase = [&](double offset, double target) {
    if (target <= phase[0] + offset) return 0.0;
    for (std::size_t i = 1; i < total; ++i) {
      const double a = phase[i - 1] + offset;
      const double b = phase[i] + offset;
      if (b >= target) return static_cast<double>(i - 1) + (target - a) / (b - a);
    }
    return static_cast<double>(total - 1);
  };

  struct Plant {
    Vec3 pos;
    double yaw;
  };
  auto plant = [&](const Leg& leg, double offset, double cycle) {
    const double x = time_of_phase(offset, cycle + 0.5 * gp.stance_fraction);
    const double yaw = sample(heading, x);
    const double lateral = sk.offset(leg.c0).x();
    Vec3 p = sample_hip(x) + kin::yaw_matrix(yaw) * Vec3(lateral, 0.0, 0.0);
    p.y() = kToeClearance - sk.offset(leg.c3).y();
    return Plant{p, yaw};
  };

  // Ankle targets and foot headings.
  std::vector<std::vector<Vec3>> ankle(legs.size(), std::vector<Vec3>(total));
  std::vector<std::vector<double>> foot_yaw(legs.size(), std::vector<double>(total));
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const double offset = 0.5 * static_cast<double>(k);
    for (std::size_t i = 0; i < total; ++i) {
      const double psi = phase[i] + offset;
      const double cycle = std::floor(psi);
      const double f = psi - cycle;
      const Plant a = plant(legs[k], offset, cycle);
      if (f < gp.stance_fraction) {
        ankle[k][i] = a.pos;
        foot_yaw[k][i] = a.yaw;
      } else {
        const Plant b = plant(legs[k], offset, cycle + 1.0);
        const double u = (f - gp.stance_fraction) / (1.0 - gp.stance_fraction);
        const double s = u * u * (3.0 - 2.0 * u);
        ankle[k][i] = (1.0 - s) * a.pos + s * b.pos;
        ankle[k][i].y() = a.pos.y() + gp.step_height * std::sin(std::numbers::pi * u);
        foot_yaw[k][i] = (1.0 - s) * a.yaw + s * b.yaw;
      }
    }
  }

  // Pelvis orientation and height, lowered wherever a foot would be out of reach.
  std::vector<Mat3> pelvis(total);
  std::vector<double> height(total);
  for (std::size_t i = 0; i < total; ++i) {
    pelvis[i] = kin::yaw_matrix(heading[i] + gp.pelvis_twist * std::sin(kTwoPi * phase[i]));
    double h = 1e9;
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const Leg& l = legs[k];
      const double reach = 0.97 * (sk.offset(l.c1).norm() + sk.offset(l.c2).norm());
      const double nominal = 0.96 * (sk.offset(l.c1).norm() + sk.offset(l.c2).norm());
      const Vec3 joint = hip[i] + pelvis[i] * sk.offset(l.c0);
      const double horiz = Vec3(ankle[k][i].x() - joint.x(), 0.0, ankle[k][i].z() - joint.z()).norm();
      const double vertical = std::sqrt(std::max(reach * reach - horiz * horiz, 1.0));
      h = std::min({h, ankle[k][i].y() - sk.offset(l.c0).y() + std::min(vertical, nominal)});
    }
    height[i] = h;
  }
  std::vector<double> smooth(total);
  for (std::size_t i = 0; i < total; ++i) {
    double acc = 0.0;
    int n = 0;
    for (int d = -4; d <= 4; ++d) {
      const auto j = static_cast<std::ptrdiff_t>(i) + d;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(total)) continue;
      acc += height[j];
      ++n;
    }
    smooth[i] = acc / n;
  }

  const int joints = sk.joint_count();
  std::vector<int> spine;
  for (int j = 0; j < joints; ++j) {
    if (sk.names()[j].rfind("Spine", 0) == 0) spine.push_back(j);
  }
  const int left_arm = sk.find("LeftArm");
  const int right_arm = sk.find("RightArm");
  const int left_fore = sk.find("LeftForeArm");
  const int right_fore = sk.find("RightForeArm");

  MotionClip clip;
  clip.frame_rate = sk.frame_rate();
  clip.name = "walk";
  for (std::size_t i = kMargin; i < kMargin + frames; ++i) {
    Vec3 root = hip[i];
    root.y() = smooth[i];
    std::vector<Mat3> local(joints, Mat3::Identity());
    local[0] = pelvis[i];
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const Leg& l = legs[k];
      const double l1 = sk.offset(l.c1).norm();
      const double l2 = sk.offset(l.c2).norm();
      const Vec3 h = root + pelvis[i] * sk.offset(l.c0);
      Vec3 to = ankle[k][i] - h;
      const double d = std::clamp(to.norm(), std::abs(l1 - l2) + 1e-3, 0.999 * (l1 + l2));
      const Vec3 u = to.normalized();
      const Vec3 a = h + d * u;
      const Vec3 fwd(std::sin(foot_yaw[k][i]), 0.0, std::cos(foot_yaw[k][i]));
      Vec3 w = fwd - fwd.dot(u) * u;
      w = w.norm() > 1e-9 ? Vec3(w.normalized()) : Vec3(u.unitOrthogonal());
      const double cos_a = std::clamp((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d), -1.0, 1.0);
      const Vec3 knee = h + l1 * (cos_a * u + std::sqrt(1.0 - cos_a * cos_a) * w);

      const Mat3 thigh = bone_basis(knee - h, fwd) * bone_basis(sk.offset(l.c1), Vec3::UnitZ()).transpose();
      const Mat3 shin = bone_basis(a - knee, fwd) * bone_basis(sk.offset(l.c2), Vec3::UnitZ()).transpose();
      const Mat3 foot = kin::yaw_matrix(foot_yaw[k][i]);
      local[l.c0] = pelvis[i].transpose() * thigh;
      local[l.c1] = thigh.transpose() * shin;
      local[l.c2] = shin.transpose() * foot;

      // Same-side arm swings against the leg.
      const double swing = -gp.arm_swing * std::sin(kTwoPi * (phase[i] + 0.5 * static_cast<double>(k) -
                                                               0.5 * gp.stance_fraction));
      const int arm = l.side > 0 ? left_arm : right_arm;
      const int fore = l.side > 0 ? left_fore : right_fore;
      if (arm >= 0) local[arm] = rot_x(swing);
      if (fore >= 0) local[fore] = rot_x(-0.25 - 0.15 * std::max(0.0, -swing));
    }
    if (!spine.empty()) {
      const double counter = -gp.pelvis_twist * std::sin(kTwoPi * phase[i]) / static_cast<double>(spine.size());
      for (int j : spine) local[j] = kin::yaw_matrix(counter);
      local[spine.front()] = local[spine.front()] * rot_x(0.04 * speed[i] / 100.0);
    }

    std::vector<Rotation6D> rots;
    rots.reserve(joints);
    for (const Mat3& m : local) rots.push_back(kin::matrix_to_sixd(m));
    clip.root_positions.push_back(root);
    clip.rotations.push_back(std::move(rots));
  }
  clip.skeleton = std::move(skeleton);
  return clip;
}

}  // namespace tween::data
