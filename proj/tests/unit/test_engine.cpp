#include "doctest.h"

#include "fixtures.hpp"

#include "tween/data/features.hpp"
#include "tween/engine/bundle.hpp"
#include "tween/engine/engine.hpp"
#include "tween/engine/evaluate.hpp"
#include "tween/metrics/metrics.hpp"
#include "tween/sampler/model.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <utility>

using namespace tween;
using namespace tween::engine;

namespace {

std::shared_ptr<const ModelBundle> tiny_bundle(std::uint64_t seed = 1) {
  return ModelBundle::random(testing::lafan_rig(), testing::tiny_manifold(), testing::tiny_sampler(), seed);
}

Keyframe key(const data::MotionClip& c, std::size_t f) { return Keyframe{data::pose_of(c, f), data::pose_of(c, f - 1)}; }

}  // namespace

TEST_CASE("double inference path matches the autodiff rollout") {
  const auto bundle = tiny_bundle(4);
  const auto clip = testing::walk_clips(1, 60)[0];
  const auto k = data::compute_kinematics(clip);
  data::CanonicalFrame frame;
  const auto states = data::extract_window(clip, k, 5, 31, &frame);
  for (int n : {5, 18, 30}) {
    Session session(bundle, states[0], frame, 42, Precision::Double);
    const Transition t = session.advance(states[static_cast<std::size_t>(n)], n);
    REQUIRE(t.states.size() == static_cast<std::size_t>(n));

    ad::Tape tape;
    ad::Binding sb(tape, std::as_const(bundle->sampler().params()));
    ad::Binding mb(tape, std::as_const(bundle->manifold().params()));
    ad::Rng rng(42);
    const auto one = [&](const kin::FrameState& s) {
      return manifold::StateVars::constant(tape, manifold::StateBatch::pack(std::span<const kin::FrameState>(&s, 1)));
    };
    const auto r = sampler::rollout(sb, mb, bundle->sampler(), bundle->manifold(), one(states[0]),
                                    one(states[static_cast<std::size_t>(n)]), n, bundle->norm(),
                                    bundle->skeleton().frame_time(), &rng);
    for (int f = 1; f < n; ++f) {
      const manifold::StateBatch b = r.frames[static_cast<std::size_t>(f - 1)].values();
      const kin::FrameState& s = t.states[static_cast<std::size_t>(f)];
      const kin::FrameState a = b.unpack(0);
      CHECK((a.p_h - s.p_h).norm() < 1e-9);
      CHECK((a.v_h - s.v_h).norm() < 1e-9);
      for (std::size_t i = 0; i < a.p_L.size(); ++i) CHECK((a.p_L[i] - s.p_L[i]).norm() < 1e-9);
      for (std::size_t i = 0; i < a.r_L.size(); ++i) {
        CHECK((a.r_L[i].up - s.r_L[i].up).norm() < 1e-9);
        CHECK((a.r_L[i].forward - s.r_L[i].forward).norm() < 1e-9);
      }
      for (std::size_t i = 0; i < a.r_U.size(); ++i) CHECK((a.r_U[i].up - s.r_U[i].up).norm() < 1e-9);
    }
  }
}

TEST_CASE("float and double paths agree loosely") {
  const auto bundle = tiny_bundle(5);
  const auto clip = testing::walk_clips(1, 60)[0];
  const Transition a = generate(bundle, key(clip, 5), key(clip, 25), 20, 3, Precision::Float);
  const Transition b = generate(bundle, key(clip, 5), key(clip, 25), 20, 3, Precision::Double);
  CHECK(metrics::l2_global(a.clip, b.clip) < 0.05);
}

TEST_CASE("generate length, start frame and determinism") {
  const auto bundle = tiny_bundle();
  const auto clip = testing::walk_clips(1, 60)[0];
  const Transition t = generate(bundle, key(clip, 10), key(clip, 40), 30, 7);
  CHECK(t.clip.frame_count() == 30);
  CHECK(t.per_frame_ms.size() == 29);
  CHECK_FALSE(t.extrapolation);
  const auto start = clip.world_positions()[10];
  const auto gen = t.clip.world_positions()[0];
  for (std::size_t j = 0; j < start.size(); ++j) CHECK((gen[j] - start[j]).norm() < 1e-6);
  const Transition u = generate(bundle, key(clip, 10), key(clip, 40), 30, 7);
  CHECK(u.clip.root_positions == t.clip.root_positions);
  CHECK(generate(bundle, key(clip, 10), key(clip, 40), 31, 7).extrapolation);
  CHECK_THROWS_AS(generate(bundle, key(clip, 10), key(clip, 40), 1, 7), DurationError);
  CHECK_THROWS_AS(generate(bundle, key(clip, 10), key(clip, 40), 1001, 7), DurationError);
  CHECK_NOTHROW(check_duration(2));
  CHECK_NOTHROW(check_duration(1000));
}

TEST_CASE("chain length and continuity") {
  const auto bundle = tiny_bundle();
  const auto clip = testing::walk_clips(1, 120)[0];
  const std::vector<ChainSegment> segs{{key(clip, 30), 10}, {key(clip, 60), 20}, {key(clip, 90), 7}};
  const data::MotionClip c = chain(bundle, key(clip, 10), segs, 5);
  CHECK(c.frame_count() == 9 + 19 + 6 + 1);

  // Same as driving a session by hand, joined without repeating junctions.
  Session s(bundle, key(clip, 10), 5);
  const Transition t1 = s.advance(segs[0].target, 10);
  const Transition t2 = s.advance(segs[1].target, 20);
  CHECK(s.segments() == 2);
  CHECK((t2.clip.root_positions[0] - t1.clip.root_positions.back()).norm() < 1e-6);
  CHECK((c.root_positions[9] - t2.clip.root_positions[0]).norm() < 1e-6);
  CHECK((c.root_positions[20] - t2.clip.root_positions[11]).norm() < 1e-6);
  // The session recenters on its current hip.
  CHECK(std::abs(s.current_state().p_h.x()) < 1e-9);
  CHECK(std::abs(s.current_state().p_h.z()) < 1e-9);
  CHECK_THROWS_AS(chain(bundle, key(clip, 10), {}, 1), std::invalid_argument);
}

TEST_CASE("interpolation baseline") {
  const auto rig = testing::lafan_rig();
  data::Pose a, b;
  a.rotations.assign(static_cast<std::size_t>(rig->joint_count()), kin::Rotation6D::identity());
  b = a;
  a.root = kin::Vec3(0, 90, 0);
  b.root = kin::Vec3(40, 90, 20);
  b.rotations[3] = kin::matrix_to_sixd(kin::yaw_matrix(std::numbers::pi / 2));
  const data::MotionClip c = interpolate_baseline(rig, a, b, 4);
  REQUIRE(c.frame_count() == 4);
  CHECK((c.root_positions[2] - kin::Vec3(20, 90, 10)).norm() < 1e-12);
  const kin::Mat3 mid = kin::sixd_to_matrix(c.rotations[2][3]);
  CHECK((mid - kin::yaw_matrix(std::numbers::pi / 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c.rotations[0][3] == a.rotations[3]);
}

TEST_CASE("bundle round trip and version check") {
  const auto bundle = tiny_bundle(9);
  const auto path = std::filesystem::temp_directory_path() / "tween_bundle_test.twn";
  bundle->save(path);
  const auto back = ModelBundle::load(path);
  std::filesystem::remove(path);
  CHECK(back->manifold().params() == bundle->manifold().params());
  CHECK(back->sampler().params() == bundle->sampler().params());
  CHECK(back->skeleton().same_topology(bundle->skeleton(), 0.0));
  CHECK(back->skeleton().frame_rate() == bundle->skeleton().frame_rate());
  const auto clip = testing::walk_clips(1, 60)[0];
  CHECK(generate(back, key(clip, 5), key(clip, 20), 15, 2).clip.root_positions ==
        generate(bundle, key(clip, 5), key(clip, 20), 15, 2).clip.root_positions);

  ad::Checkpoint ck = bundle->to_checkpoint();
  ck.texts["bundle.version"] = "99";
  CHECK_THROWS_AS(ModelBundle::from_checkpoint(ck), ad::CheckpointError);
  ad::Checkpoint empty;
  CHECK_THROWS_AS(ModelBundle::from_checkpoint(empty), ad::CheckpointError);
}

TEST_CASE("skeleton text is lossless") {
  const kin::Skeleton sk = kin::Skeleton::h36m_like();
  const auto back = skeleton_from_text(skeleton_to_text(sk));
  CHECK(back->same_topology(sk, 0.0));
  CHECK(back->names() == sk.names());
  CHECK(back->frame_rate() == sk.frame_rate());
}

TEST_CASE("latency statistics") {
  const LatencyStats s = latency_stats({5.0, 1.0, 3.0, 2.0, 4.0});
  CHECK(s.samples == 5);
  CHECK(s.mean_ms == 3.0);
  CHECK(s.median_ms == 3.0);
  CHECK(s.max_ms == 5.0);
  CHECK(s.p99_ms == 5.0);
  std::vector<double> many;
  for (int i = 1; i <= 1000; ++i) many.push_back(i);
  CHECK(latency_stats(many).p99_ms == 990.0);
  CHECK_THROWS_AS(latency_stats({}), std::invalid_argument);
  const auto bundle = tiny_bundle();
  CHECK_THROWS_AS(bench_latency(*bundle, 0), std::invalid_argument);
  CHECK(bench_latency(*bundle, 50).samples == 50);
}

TEST_CASE("evaluation protocol") {
  const auto bundle = tiny_bundle();
  const auto clips = testing::walk_clips(1, 130);
  const EvalReport r = evaluate(bundle, clips, {5, 15}, 1);
  CHECK(r.windows == 2);
  CHECK(r.rows.size() == 6);
  const EvalRow& gt = r.row("ground_truth", 15);
  CHECK(gt.l2_cm == 0.0);
  CHECK(gt.npss == 0.0);
  CHECK(r.row("model", 5).l2_cm > 0.0);
  CHECK(r.row("interpolation", 5).l2_cm < r.row("interpolation", 15).l2_cm);
  CHECK(r.to_text().find("units") != std::string::npos);
  CHECK_THROWS(r.row("model", 30));
  CHECK_THROWS_AS(evaluate(bundle, clips, {65}, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(bundle, testing::walk_clips(1, 40), {5}, 1), std::invalid_argument);
  const data::MotionClip s = slice(clips[0], 10, 5);
  CHECK(s.frame_count() == 5);
  CHECK(s.root_positions[0] == clips[0].root_positions[10]);
}
