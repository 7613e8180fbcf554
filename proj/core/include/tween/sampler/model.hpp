#pragma once

#include "tween/data/norm_stats.hpp"
#include "tween/manifold/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tween::sampler {

using ad::Index;
using ad::Tensor;
using ad::Var;
using manifold::StateBatch;
using manifold::StateVars;

struct SamplerConfig {
  Index encoder_hidden = 512;
  Index encoder_out = 256;  // also the time-embedding width
  Index lstm_hidden = 1024;
  std::vector<Index> decoder_hidden{512, 256};
  double t_zero = 5.0;
  double t_period = 30.0;
  double noise_variance = 0.5;
  double z_scale = 4.5;
  /// Add target noise to the state encoding as well (default: target and
  /// offset encodings only).
  bool noise_on_state = false;

  void validate() const;
  std::string to_text() const;
  static SamplerConfig from_text(const std::string& text);
  bool operator==(const SamplerConfig&) const = default;
};

/// Sinusoidal embedding of the frames remaining: component 2i is
/// sin(dt / 10000^(2i/d)) and component 2i+1 the matching cosine. (1 x d).
Tensor time_embedding(double dt, Index d);

/// clamp((dt - t_zero) / (t_period - t_zero), 0, 1).
double noise_amplitude(double dt, double t_zero = 5.0, double t_period = 30.0);

struct StepOutput {
  Var z;      // (B x latent), each component in [-z_scale, z_scale]
  Var v_h;    // (B x 3) next hip velocity, cm/s
  Var dr_U;   // (B x 6U)
  ad::LstmState state;
};

class Sampler {
 public:
  Sampler() = default;
  Sampler(const SamplerConfig& config, Index latent, int upper_joints, std::uint64_t seed);

  const SamplerConfig& config() const { return config_; }
  Index latent() const { return latent_; }
  int upper_joints() const { return upper_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  ad::LstmState zero_state(ad::Tape& tape, Index batch) const { return lstm_.zero_state(tape, batch); }

  /// One recurrent step toward `target` with `dt` frames remaining. Noise is
  /// drawn from `rng` when given and the amplitude is nonzero.
  StepOutput step(ad::Binding& bind, const StateVars& current, const StateVars& target, const ad::LstmState& state,
                  double dt, const data::NormStats& norm, ad::Rng* rng) const;

  // Layer access for the inference path.
  const ad::Mlp& state_encoder() const { return state_enc_; }
  const ad::Mlp& target_encoder() const { return target_enc_; }
  const ad::Mlp& offset_encoder() const { return offset_enc_; }
  const ad::Lstm& lstm() const { return lstm_; }
  const ad::Mlp& decoder() const { return decoder_; }

  void save(ad::Checkpoint& ck, const std::string& prefix) const;
  static Sampler load(const ad::Checkpoint& ck, const std::string& prefix);

 private:
  SamplerConfig config_;
  Index latent_ = 0;
  int upper_ = 0;
  ad::ParameterSet params_;
  ad::Mlp state_enc_;
  ad::Mlp target_enc_;
  ad::Mlp offset_enc_;
  ad::Lstm lstm_;
  ad::Mlp decoder_;
};

/// Encoder input shared by the state and target encoders: v_h and v_L in m/s,
/// then r_U.
Var encoder_input(const StateVars& s);
/// (p_L(target) - p_L(current)) / std, per dimension.
Var offset_input(const StateVars& current, const StateVars& target, const data::NormStats& norm);

struct Rollout {
  std::vector<StateVars> frames;  // generated frames 1..n-1
  ad::LstmState state;
};

/// Runs n-1 steps from `start` toward `target`: sampler step, frozen manifold
/// decode, next-state assembly, upper body by additive deltas. `warmup`
/// frames (oldest first, ending just before `start`) only advance the
/// recurrent state.
Rollout rollout(ad::Binding& sampler_bind, ad::Binding& manifold_bind, const Sampler& sampler,
                const manifold::Manifold& manifold, const StateVars& start, const StateVars& target, int n,
                const data::NormStats& norm, double frame_time, ad::Rng* rng,
                std::optional<ad::LstmState> initial = std::nullopt, const std::vector<StateVars>& warmup = {});

}  // namespace tween::sampler
