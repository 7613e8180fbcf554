#pragma once

#include "tween/autodiff/checkpoint.hpp"
#include "tween/autodiff/layers.hpp"
#include "tween/manifold/state_batch.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tween::manifold {

struct ManifoldConfig {
  Index latent = 32;
  int experts = 6;
  std::vector<Index> encoder_hidden{256, 256};
  std::vector<Index> gating_hidden{128, 128};
  Index expert_hidden = 256;
  int expert_layers = 3;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  /// key=value lines; from_text fills missing keys with defaults.
  std::string to_text() const;
  static ManifoldConfig from_text(const std::string& text);
  bool operator==(const ManifoldConfig&) const = default;
};

struct Encoding {
  Var mu;
  Var logvar;
};

struct Decoding {
  Var output;                // (B x 72): v_L (m/s), dr_L, dr_h
  Var gate;                  // (B x E) softmax weights
  std::vector<Var> experts;  // E outputs of (B x 72)
};

/// CVAE over consecutive frame pairs with a gated mixture-of-experts decoder.
/// The latent code and next hip velocity are fed to every expert layer.
class Manifold {
 public:
  Manifold() = default;
  Manifold(const ManifoldConfig& config, std::uint64_t seed);

  const ManifoldConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  /// c, c_next: (B x 75) conditions. Returns mean and log-variance.
  Encoding encode(ad::Binding& bind, Var c, Var c_next) const;
  /// z = mu + exp(logvar / 2) * eps, eps ~ N(0, I) drawn from `rng`.
  Var reparameterize(const Encoding& e, ad::Rng& rng) const;
  Var reparameterize(const Encoding& e, const Tensor& eps) const;

  /// c (B x 75), vh_next (B x 3, m/s), z (B x latent).
  Decoding decode(ad::Binding& bind, Var c, Var vh_next, Var z) const;

  /// Next state from a decoding: lower velocities and rotation deltas from
  /// the decoder, the given hip velocity (cm/s), integrated positions. r_U is
  /// carried over unchanged.
  static StateVars advance(const StateVars& cur, const Decoding& d, Var vh_next_cm, double dt);

  const ad::Mlp& encoder() const { return encoder_; }
  const ad::Mlp& gating() const { return gating_; }
  const std::vector<std::vector<ad::Linear>>& experts() const { return experts_; }

  void save(ad::Checkpoint& ck, const std::string& prefix) const;
  static Manifold load(const ad::Checkpoint& ck, const std::string& prefix);

 private:
  ManifoldConfig config_;
  ad::ParameterSet params_;
  ad::Mlp encoder_;
  ad::Mlp gating_;
  std::vector<std::vector<ad::Linear>> experts_;
};

}  // namespace tween::manifold
