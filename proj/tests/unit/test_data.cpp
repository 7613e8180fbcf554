#include "doctest.h"

#include "tween/autodiff/checkpoint.hpp"
#include "tween/data/bvh.hpp"
#include "tween/data/corpus.hpp"
#include "tween/data/features.hpp"
#include "tween/data/norm_stats.hpp"
#include "tween/data/procedural.hpp"
#include "tween/data/windows.hpp"
#include "tween/kinematics/fk.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace tween;
using namespace tween::data;

namespace {

std::shared_ptr<const Skeleton> rig() { return std::make_shared<const Skeleton>(Skeleton::lafan_like()); }

MotionClip walk(std::size_t frames, std::uint64_t seed = 3) { return generate_walk(rig(), frames, random_gait(seed)); }


}  // namespace

TEST_CASE("window starts") {
  CHECK(window_starts(100, 50, 25) == std::vector<std::size_t>{0, 25, 50});
  CHECK(window_starts(49, 50, 25).empty());
  CHECK(window_starts(50, 50, 25) == std::vector<std::size_t>{0});
  CHECK(window_starts(100, 65, 25).size() == 1);
  CHECK(window_starts(105, 65, 25) == std::vector<std::size_t>{0, 40});
  CHECK(window_starts(300, 65, 25).size() == 6);
  const MotionClip c = walk(100);
  CHECK_THROWS_AS(make_windows(c, 0, 25, 25), std::invalid_argument);
  const auto ws = make_windows(std::vector<MotionClip>{c, c}, 50, 25);
  REQUIRE(ws.size() == 6);
  CHECK(ws[4].clip == 1);
  CHECK(ws[4].start == 25);
}

TEST_CASE("subject split") {
  MotionClip a = walk(60), b = walk(60, 4);
  a.subject = "s1";
  b.subject = "s2";
  const auto [train, test] = split_by_subject({a, b, a}, "s2");
  CHECK(train.size() == 2);
  CHECK(test.size() == 1);
  CHECK(test[0].subject == "s2");
  CHECK_THROWS(split_by_subject({a}, "s9"));
  CHECK_THROWS(split_by_subject({a}, ""));
}

TEST_CASE("euler conversions") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-80, 80);
  for (auto order : {kin::EulerOrder::ZYX, kin::EulerOrder::ZXY}) {
    for (int i = 0; i < 50; ++i) {
      const Vec3 deg(u(rng), u(rng), u(rng));
      const Mat3 m = euler_to_matrix(order, deg);
      CHECK((euler_to_matrix(order, matrix_to_euler(order, m)) - m).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  const double r = std::numbers::pi / 180.0;
  const Mat3 oracle = (Eigen::AngleAxisd(10 * r, Vec3::UnitZ()) * Eigen::AngleAxisd(20 * r, Vec3::UnitY()) *
                       Eigen::AngleAxisd(30 * r, Vec3::UnitX()))
                          .toRotationMatrix();
  CHECK((euler_to_matrix(kin::EulerOrder::ZYX, Vec3(10, 20, 30)) - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bvh write and parse") {
  const MotionClip c = walk(12);
  const MotionClip back = parse_bvh(write_bvh(c), "walk");
  REQUIRE(back.frame_count() == 12);
  CHECK(back.skeleton->same_topology(*c.skeleton, 1e-6));
  CHECK(back.frame_rate == doctest::Approx(c.frame_rate).epsilon(1e-6));
  const auto a = c.world_positions(), b = back.world_positions();
  for (std::size_t f = 0; f < 12; ++f) {
    for (int j = 0; j < c.skeleton->joint_count(); ++j) {
      CHECK((a[f][j] - b[f][j]).norm() < 1e-4);
      CHECK((kin::sixd_to_matrix(back.rotations[f][j]) - kin::sixd_to_matrix(c.rotations[f][j])).cwiseAbs().maxCoeff() <
            1e-6);
    }
  }
}

TEST_CASE("bvh errors carry a line number") {
  std::string text = write_bvh(walk(3));
  const std::size_t at = text.find("Frames: 3");
  REQUIRE(at != std::string::npos);
  text.replace(at, 9, "Frames: 4");
  CHECK_THROWS_AS(parse_bvh(text), BvhError);
  try {
    parse_bvh("HIERARCHY\nROOT Hips\n{\n  OFFSET 0 0\n}\n");
    FAIL("expected a parse error");
  } catch (const BvhError& e) {
    CHECK(e.line() > 0);
  }
}

TEST_CASE("bundled corpus") {
  const auto clips = load_corpus(std::filesystem::path(TWEEN_DATA_DIR) / "corpus" / "manifest.txt");
  REQUIRE(clips.size() == 5);
  std::size_t frames = 0;
  for (const auto& c : clips) {
    frames += c.frame_count();
    CHECK(c.skeleton == clips[0].skeleton);
    CHECK_NOTHROW(c.validate(50));
  }
  CHECK(frames >= 1000);
  CHECK(clips[4].subject == "subject5");
}

TEST_CASE("features are in the canonical frame") {
  const MotionClip c = walk(80);
  const ClipKinematics k = compute_kinematics(c);
  CanonicalFrame frame;
  const auto states = extract_window(c, k, 30, 20, &frame);
  const FrameState& s0 = states[0];
  CHECK(std::abs(s0.p_h.x()) < 1e-9);
  CHECK(std::abs(s0.p_h.z()) < 1e-9);
  CHECK(s0.p_h.y() == doctest::Approx(c.root_positions[30].y()));
  CHECK(std::abs(kin::yaw_of(kin::sixd_to_matrix(s0.r_h))) < 1e-9);
  // Velocities are finite differences of positions.
  const Vec3 dv = (k.positions[31][0] - k.positions[30][0]) * c.frame_rate;
  CHECK((frame.vector_to_world(states[1].v_h) - dv).norm() < 1e-9);
  // FK of the state reproduces the lower positions.
  const auto pos = state_positions(*c.skeleton, states[5]);
  const auto& lp = c.skeleton->lower_positional();
  for (std::size_t i = 0; i < lp.size(); ++i) CHECK((pos[lp[i]] - states[5].p_L[i]).norm() < 1e-9);
  // Back to world.
  const MotionClip w = states_to_clip(c.skeleton, states, frame);
  const auto wp = w.world_positions();
  for (int j = 0; j < c.skeleton->joint_count(); ++j) CHECK((wp[7][j] - k.positions[37][j]).norm() < 1e-9);
}

TEST_CASE("rebase matches extraction in the other frame") {
  const MotionClip c = walk(80);
  const ClipKinematics k = compute_kinematics(c);
  const CanonicalFrame a = frame_at(c, 10), b = frame_at(c, 40);
  const auto sa = extract_frames(c, k, 20, 1, a)[0];
  const auto sb = extract_frames(c, k, 20, 1, b)[0];
  const FrameState r = rebase(sa, a, b);
  CHECK((r.p_h - sb.p_h).norm() < 1e-9);
  CHECK((r.v_h - sb.v_h).norm() < 1e-9);
  CHECK((kin::sixd_to_matrix(r.r_h) - kin::sixd_to_matrix(sb.r_h)).cwiseAbs().maxCoeff() < 1e-9);
  for (std::size_t i = 0; i < r.p_L.size(); ++i) {
    CHECK((r.p_L[i] - sb.p_L[i]).norm() < 1e-9);
    CHECK((r.v_L[i] - sb.v_L[i]).norm() < 1e-9);
  }
  CHECK(r.r_L == sb.r_L);
}

TEST_CASE("state from pose") {
  const MotionClip c = walk(40);
  const ClipKinematics k = compute_kinematics(c);
  const CanonicalFrame f = frame_at(c, 12);
  const Pose cur = pose_of(c, 12), prev = pose_of(c, 11);
  const FrameState s = state_from_pose(*c.skeleton, cur, &prev, c.frame_rate, f);
  const FrameState e = extract_frames(c, k, 12, 1, f)[0];
  CHECK((s.v_h - e.v_h).norm() < 1e-9);
  CHECK((s.p_L[3] - e.p_L[3]).norm() < 1e-9);
  const FrameState still = state_from_pose(*c.skeleton, cur, nullptr, c.frame_rate, f);
  CHECK(still.v_h.norm() == 0.0);
}

TEST_CASE("norm stats") {
  std::vector<FrameState> states(4);
  for (int i = 0; i < 4; ++i) {
    for (auto& p : states[i].p_L) p = Vec3(i, 2.0 * i, 5.0);
  }
  std::vector<std::size_t> degenerate;
  const NormStats n = NormStats::compute(states, &degenerate);
  CHECK(n.mean[0] == doctest::Approx(1.5));
  // Population standard deviation of 0,1,2,3.
  CHECK(n.std[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(n.std[1] == doctest::Approx(2.0 * std::sqrt(1.25)));
  CHECK(n.std[2] == 1.0);
  CHECK(degenerate.size() == 6);
  const auto z = n.normalize(states[3]);
  CHECK(z[0] == doctest::Approx(1.5 / std::sqrt(1.25)));
  const auto back = n.denormalize(z);
  CHECK(back[1] == doctest::Approx(6.0));
  ad::Checkpoint ck;
  n.put(ck, "norm.");
  const NormStats m = NormStats::get(ad::Checkpoint::deserialize(ck.serialize()), "norm.");
  CHECK(m.mean == n.mean);
  CHECK(m.std == n.std);
}

TEST_CASE("procedural walk is deterministic and plants feet") {
  const MotionClip a = walk(120, 8), b = walk(120, 8);
  CHECK(a.root_positions == b.root_positions);
  CHECK_NOTHROW(a.validate(120));
  const auto pos = a.world_positions();
  double lowest = 1e9;
  for (const auto& f : pos)
    for (int j : a.skeleton->feet()) lowest = std::min(lowest, f[j].y());
  CHECK(lowest > -1.0);
  CHECK(lowest < 5.0);
}
