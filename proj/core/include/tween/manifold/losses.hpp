#pragma once

#include "tween/autodiff/ops.hpp"
#include "tween/kinematics/skeleton.hpp"

#include <span>
#include <utility>
#include <vector>

namespace tween::manifold {

using ad::Tensor;
using ad::Var;

/// mean(-0.5 * (1 + logvar - mu^2 - exp(logvar))).
Var kl_loss(Var mu, Var logvar);

/// Mean squared error over the concatenation of positions and rotations.
/// Position and rotation errors are multiplied by the given weights before
/// squaring.
Var rec_loss(Var p_hat, Var r_hat, const Tensor& p, const Tensor& r, double position_weight = 1.0,
             double rotation_weight = 1.0);

/// Per-row lengths (B x bones) between slots of a (B x 3k) position block.
Tensor bone_lengths(const Tensor& positions, std::span<const std::pair<int, int>> bones);

/// mean |‖p̂_j − p̂_k‖ − ℓ_jk| over bones and rows; `lengths` from bone_lengths
/// of the ground truth.
Var bone_loss(Var p_hat, const Tensor& lengths, std::span<const std::pair<int, int>> bones);

/// 1 where the ground-truth foot's world speed (relative velocity plus hip
/// velocity, cm/s) is below `threshold` cm per frame. Shape (B x feet).
Tensor contact_mask(const Tensor& v_L, const Tensor& v_h, std::span<const int> foot_slots, double threshold,
                    double frame_rate);

/// Mean over (row, foot) of contact * ‖v̂_foot + v_h‖.
Var foot_loss(Var v_L_hat, Var v_h, const Tensor& contact, std::span<const int> foot_slots);

/// Slots of the skeleton's foot joints within lower_positional().
std::vector<int> foot_slots(const kin::Skeleton& skeleton);

}  // namespace tween::manifold
