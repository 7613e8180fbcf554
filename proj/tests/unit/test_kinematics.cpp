#include "doctest.h"

#include "gradcheck.hpp"

#include "tween/kinematics/fk.hpp"
#include "tween/kinematics/frame_state.hpp"
#include "tween/kinematics/rotation.hpp"
#include "tween/kinematics/skeleton.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>

using namespace tween;
using kin::Mat3;
using kin::Rotation6D;
using kin::Vec3;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<Mat3> random_pose(const kin::Skeleton& sk, std::mt19937_64& rng) {
  std::vector<Mat3> r;
  for (int j = 0; j < sk.joint_count(); ++j) r.push_back(random_rotation(rng));
  return r;
}

}  // namespace

TEST_CASE("6D conversion round trips") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Mat3 m = random_rotation(rng);
    const Mat3 back = kin::sixd_to_matrix(kin::matrix_to_sixd(m));
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-9);
    const Rotation6D r = kin::matrix_to_sixd(m);
    CHECK(m.col(1).isApprox(r.up, 1e-12));
    CHECK(m.col(2).isApprox(r.forward, 1e-12));
    CHECK(m.col(0).isApprox(r.up.cross(r.forward), 1e-12));
    const Rotation6D q = kin::from_quaternion(kin::to_quaternion(r));
    CHECK((kin::sixd_to_matrix(q) - m).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("6D orthonormalization of raw values") {
  Rotation6D r;
  r.up = Vec3(0, 2, 0);
  r.forward = Vec3(0, 1, 3);
  const Mat3 m = kin::sixd_to_matrix(r);
  CHECK(m.isApprox(Mat3::Identity(), 1e-12));
  CHECK(kin::canonicalize(r) == Rotation6D::identity());
  Rotation6D bad;
  bad.up = Vec3::Zero();
  CHECK_THROWS_AS(kin::sixd_to_matrix(bad), kin::DegenerateRotationError);
  Rotation6D parallel;
  parallel.forward = Vec3(0, 3, 0);
  CHECK_THROWS_AS(kin::sixd_to_matrix(parallel), kin::DegenerateRotationError);
  CHECK_THROWS_AS(kin::matrix_to_sixd(2.0 * Mat3::Identity()), std::invalid_argument);
}

TEST_CASE("yaw conventions") {
  CHECK((kin::yaw_matrix(std::numbers::pi / 2) * Vec3::UnitZ() - Vec3::UnitX()).norm() < 1e-12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng);
    CHECK(std::remainder(kin::yaw_of(kin::yaw_matrix(a)) - a, 2 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fk preserves bone lengths") {
  for (const kin::Skeleton& sk : {kin::Skeleton::lafan_like(), kin::Skeleton::h36m_like()}) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
      const auto rots = random_pose(sk, rng);
      const Vec3 root(10.0 * i, 90.0, -3.0 * i);
      const auto pos = kin::fk(sk, root, rots);
      CHECK((pos[0] - root).norm() < 1e-12);
      for (int j = 1; j < sk.joint_count(); ++j) {
        CHECK(std::abs((pos[j] - pos[sk.parent(j)]).norm() - sk.offset(j).norm()) < 1e-9);
      }
    }
  }
}

TEST_CASE("fk matches a hand-chained oracle") {
  const kin::Skeleton sk = kin::Skeleton::lafan_like();
  std::mt19937_64 rng(10);
  const auto rots = random_pose(sk, rng);
  const Vec3 root(1, 2, 3);
  const auto pos = kin::fk(sk, root, rots);
  // Walk the parent chain explicitly for the last joint.
  const int leaf = sk.joint_count() - 1;
  std::vector<int> chain;
  for (int j = leaf; j >= 0; j = sk.parent(j)) chain.insert(chain.begin(), j);
  Mat3 g = Mat3::Identity();
  Vec3 p = root;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (k > 0) p += g * sk.offset(chain[k]);
    g = g * rots[chain[k]];
  }
  CHECK((pos[leaf] - p).norm() < 1e-9);
}

TEST_CASE("fk is yaw equivariant") {
  const kin::Skeleton sk = kin::Skeleton::lafan_like();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.1, 3.1);
  for (int i = 0; i < 100; ++i) {
    auto rots = random_pose(sk, rng);
    const Vec3 root(u(rng) * 10, 90.0, u(rng) * 10);
    const Mat3 yaw = kin::yaw_matrix(u(rng));
    const auto pos = kin::fk(sk, root, rots);
    rots[0] = yaw * rots[0];
    const auto turned = kin::fk(sk, yaw * root, rots);
    for (int j = 0; j < sk.joint_count(); ++j) CHECK((turned[j] - yaw * pos[j]).norm() < 1e-9);
  }
}

TEST_CASE("differentiable fk matches the double path and central differences") {
  const kin::Skeleton sk = kin::Skeleton::lafan_like();
  std::mt19937_64 rng(13);
  const int J = sk.joint_count();
  ad::Tensor root = testing::random_tensor(2, 3, rng, -5, 5);
  ad::Tensor rot = testing::random_tensor(2, 6 * J, rng);
  ad::Tape t;
  const ad::Tensor y = kin::fk(sk, t.constant(root), t.constant(rot)).value();
  for (int b = 0; b < 2; ++b) {
    std::vector<Rotation6D> rs;
    for (int j = 0; j < J; ++j) rs.push_back(Rotation6D::from_span(std::span<const double>(rot.row(b).data() + 6 * j, 6)));
    const auto pos = kin::fk(sk, Vec3(root.row(b).transpose()), rs);
    for (int j = 0; j < J; ++j) CHECK((y.block(b, 3 * j, 1, 3).transpose() - pos[j]).norm() < 1e-9);
  }
  const auto r = testing::check_op(
      [&](ad::Tape&, const std::vector<ad::Var>& v) { return kin::fk(sk, v[0], v[1]); }, {root, rot}, rng);
  CHECK(r.rel_error < 1e-4);
}

TEST_CASE("6D backward matches central differences") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20; ++i) {
    ad::Tensor six = testing::random_tensor(1, 6, rng);
    const ad::Tensor w = testing::random_tensor(3, 3, rng);
    auto loss = [&]() {
      const Mat3 m = kin::sixd_to_matrix(Rotation6D::from_span(std::span<const double>(six.data(), 6)));
      double s = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += w(a, b) * m(a, b);
      return s;
    };
    Mat3 g;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) g(a, b) = w(a, b);
    const auto an = kin::sixd_to_matrix_backward(Rotation6D::from_span(std::span<const double>(six.data(), 6)), g);
    std::vector<double*> coords;
    for (int k = 0; k < 6; ++k) coords.push_back(six.data() + k);
    const auto r = testing::compare(loss, coords, std::vector<double>(an.begin(), an.end()));
    CHECK(r.rel_error < 1e-4);
  }
}

TEST_CASE("skeleton partition") {
  const kin::Skeleton sk = kin::Skeleton::lafan_like();
  CHECK(sk.joint_count() == 22);
  CHECK(sk.frame_rate() == 30.0);
  CHECK(sk.lower().size() == 8);
  CHECK(sk.upper_count() == 13);
  CHECK(sk.lower_positional().size() == 6);
  CHECK(sk.feet().size() == 4);
  for (int j : sk.lower_positional()) CHECK(sk.parent(j) != 0);
  const kin::Skeleton h = kin::Skeleton::h36m_like();
  CHECK(h.joint_count() == 21);
  CHECK(h.frame_rate() == 25.0);
  CHECK(h.same_topology(h));
  CHECK_FALSE(h.same_topology(sk));
  CHECK_THROWS_AS(kin::Skeleton({"a", "b"}, {-1, 0}, {Vec3::Zero(), Vec3::UnitY()}, 30.0), std::invalid_argument);
}

TEST_CASE("frame state joint rotation round trip") {
  const kin::Skeleton sk = kin::Skeleton::lafan_like();
  std::mt19937_64 rng(15);
  std::vector<Rotation6D> rs;
  for (int j = 0; j < sk.joint_count(); ++j) rs.push_back(kin::matrix_to_sixd(random_rotation(rng)));
  kin::FrameState s;
  kin::set_joint_rotations(s, sk, rs);
  CHECK(s.joint_rotations(sk) == rs);
  CHECK_NOTHROW(s.check_against(sk));
  s.r_U.pop_back();
  CHECK_THROWS_AS(s.check_against(sk), std::invalid_argument);
}
