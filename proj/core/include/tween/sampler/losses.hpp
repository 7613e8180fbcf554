#pragma once

#include "tween/data/norm_stats.hpp"
#include "tween/manifold/state_batch.hpp"

#include <span>
#include <vector>

namespace tween::sampler {

using manifold::StateBatch;
using manifold::StateVars;

struct SamplerLossWeights {
  double rot = 1.0;
  double leg = 1.0;
  double pos_rot = 0.5;
  double bone = 0.5;
  double foot = 0.5;
  double position_scale = 0.01;    // cm -> m for the FK, bone and foot terms
  double contact_threshold = 0.2;  // cm per frame
};

struct SamplerLossTerms {
  ad::Var total;
  ad::Var rot;      // mean L1 over r_h, r_L, r_U
  ad::Var leg;      // mean L1 over z-scored p_L
  ad::Var pos_rot;  // mean L1 between FK of predicted rotations and true joint positions
  ad::Var foot;
  ad::Var bone;
};

/// Losses over generated frames against the matching ground truth; frame
/// terms are averaged with equal weight. Throws std::invalid_argument on a
/// length mismatch.
SamplerLossTerms sampler_losses(const std::vector<StateVars>& pred, std::span<const StateBatch> gt,
                                const kin::Skeleton& skeleton, const data::NormStats& norm,
                                const SamplerLossWeights& weights = {});

/// World-independent FK positions (B x 3J) of a state batch.
ad::Tensor batch_positions(const StateBatch& s, const kin::Skeleton& skeleton);

}  // namespace tween::sampler
