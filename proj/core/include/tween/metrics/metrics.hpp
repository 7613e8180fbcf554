#pragma once

#include "tween/data/motion_clip.hpp"

#include <span>
#include <vector>

namespace tween::metrics {

using data::MotionClip;
using kin::Skeleton;
using kin::Vec3;

/// Per-frame, per-joint positions: [frame][joint].
using PositionSeq = std::vector<std::vector<Vec3>>;
/// Per-frame feature rows: [frame][dimension].
using FeatureSeq = std::vector<std::vector<double>>;

inline constexpr double kSkateHeight = 2.5;  // cm

/// Mean per-joint Euclidean distance between world positions. Throws
/// std::invalid_argument on frame or joint count mismatch.
double l2_global(const PositionSeq& pred, const PositionSeq& gt);
/// Positions are obtained by FK of both clips first.
double l2_global(const MotionClip& pred, const MotionClip& gt);

/// Power spectrum of every column (bins 0..T/2 of the real DFT), as
/// [dimension][bin].
std::vector<std::vector<double>> power_spectra(const FeatureSeq& seq);

/// Normalized power spectrum similarity: per-dimension earth mover's distance
/// between normalized power spectra (L1 distance of their cumulative sums),
/// averaged with weights equal to the ground truth's total power. A
/// dimension whose spectrum is all zero is treated as pure DC.
double npss(const FeatureSeq& pred, const FeatureSeq& gt);

/// Rotation features used for NPSS: the 6D pair of every joint's local
/// rotation (joint 0 global), canonicalized.
FeatureSeq rotation_features(const MotionClip& clip);

/// clamp(2 - 2^(h/H), 0, 1).
double skate_factor(double height, double H = kSkateHeight);

/// Mean over frames 1..T-1 and foot joints of horizontal (XZ) foot speed in
/// cm/frame times skate_factor(foot height). Throws std::invalid_argument if
/// `feet` is empty.
double foot_skate(const PositionSeq& positions, std::span<const int> feet, double H = kSkateHeight);
double foot_skate(const MotionClip& clip, double H = kSkateHeight);

/// Mean absolute deviation of per-frame bone lengths from rest lengths (cm).
double bone_length_error(const PositionSeq& positions, const Skeleton& skeleton);
double bone_length_error(const MotionClip& clip);

}  // namespace tween::metrics
