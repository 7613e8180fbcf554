#pragma once

#include "tween/data/procedural.hpp"
#include "tween/manifold/model.hpp"
#include "tween/sampler/model.hpp"

#include <memory>
#include <vector>

namespace tween::testing {

inline std::shared_ptr<const kin::Skeleton> lafan_rig() {
  static const auto rig = std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like());
  return rig;
}

inline std::vector<data::MotionClip> walk_clips(int count, std::size_t frames, std::uint64_t seed = 100) {
  std::vector<data::MotionClip> clips;
  for (int i = 0; i < count; ++i) {
    clips.push_back(data::generate_walk(lafan_rig(), frames, data::random_gait(seed + i)));
    clips.back().subject = "subject" + std::to_string(i + 1);
  }
  return clips;
}

inline manifold::ManifoldConfig tiny_manifold() {
  manifold::ManifoldConfig c;
  c.latent = 6;
  c.experts = 3;
  c.encoder_hidden = {16};
  c.gating_hidden = {8};
  c.expert_hidden = 16;
  c.expert_layers = 2;
  return c;
}

/// Shrinks the expert output layers. Untrained experts emit rotation deltas of
/// order one, which compound under feedback rollouts; trained ones do not.
inline manifold::Manifold damped(manifold::Manifold m, double factor = 0.02) {
  for (const auto& expert : m.experts()) {
    m.params()[expert.back().weight_index()].value *= factor;
  }
  return m;
}

inline sampler::SamplerConfig tiny_sampler() {
  sampler::SamplerConfig c;
  c.encoder_hidden = 16;
  c.encoder_out = 8;
  c.lstm_hidden = 12;
  c.decoder_hidden = {16, 8};
  return c;
}

}  // namespace tween::testing
