#include "tween/data/features.hpp"
#include "tween/engine/bundle.hpp"
#include "tween/engine/engine.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace tween;

namespace {

std::shared_ptr<const engine::ModelBundle> bundle_for(double width) {
  manifold::ManifoldConfig mc;
  sampler::SamplerConfig sc;
  auto scale = [&](ad::Index w) { return std::max<ad::Index>(8, static_cast<ad::Index>(static_cast<double>(w) * width)); };
  mc.expert_hidden = scale(mc.expert_hidden);
  for (auto& w : mc.encoder_hidden) w = scale(w);
  for (auto& w : mc.gating_hidden) w = scale(w);
  sc.encoder_hidden = scale(sc.encoder_hidden);
  sc.encoder_out = scale(sc.encoder_out);
  sc.lstm_hidden = scale(sc.lstm_hidden);
  for (auto& w : sc.decoder_hidden) w = scale(w);
  return engine::ModelBundle::random(std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like()), mc, sc, 1);
}

// One generated frame: sampler step, manifold decode, state assembly.
template <typename S>
void frame_step(benchmark::State& st, const engine::InferenceModel<S>& model, const engine::ModelBundle& b) {
  const kin::Skeleton& sk = b.skeleton();
  data::Pose rest;
  rest.root = kin::Vec3(0, 90, 0);
  rest.rotations.assign(static_cast<std::size_t>(sk.joint_count()), kin::Rotation6D::identity());
  const kin::FrameState start = data::state_from_pose(sk, rest, nullptr, sk.frame_rate(), data::CanonicalFrame{});
  kin::FrameState target = start;
  target.p_h.z() += 100.0;
  for (auto& p : target.p_L) p.z() += 100.0;
  const auto cache = model.prepare(target);
  auto rec = model.zero_state();
  ad::Rng rng(1);
  kin::FrameState cur = start;
  int k = 1;
  for (auto _ : st) {
    cur = model.step(cur, cache, rec, static_cast<double>(30 - k), &rng);
    benchmark::DoNotOptimize(cur.p_h);
    if (++k == 30) {
      st.PauseTiming();
      k = 1;
      cur = start;
      rec = model.zero_state();
      st.ResumeTiming();
    }
  }
  st.SetItemsProcessed(st.iterations());
}

void BM_FrameFloat(benchmark::State& st) {
  const auto b = bundle_for(static_cast<double>(st.range(0)) / 100.0);
  frame_step(st, b->float_model(), *b);
}

void BM_FrameDouble(benchmark::State& st) {
  const auto b = bundle_for(static_cast<double>(st.range(0)) / 100.0);
  frame_step(st, b->double_model(), *b);
}

// Width sweep in percent of the paper sizes.
BENCHMARK(BM_FrameFloat)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FrameDouble)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Transition30(benchmark::State& st) {
  const auto b = bundle_for(1.0);
  const kin::Skeleton& sk = b->skeleton();
  data::Pose rest;
  rest.root = kin::Vec3(0, 90, 0);
  rest.rotations.assign(static_cast<std::size_t>(sk.joint_count()), kin::Rotation6D::identity());
  data::Pose ahead = rest;
  ahead.root.z() += 100.0;
  for (auto _ : st) {
    auto t = engine::generate(b, engine::Keyframe{rest, {}}, engine::Keyframe{ahead, {}}, 30, 1);
    benchmark::DoNotOptimize(t.clip.root_positions.data());
  }
}
BENCHMARK(BM_Transition30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
