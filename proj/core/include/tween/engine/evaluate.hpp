#pragma once

#include "tween/engine/engine.hpp"

#include <string>
#include <vector>

namespace tween::engine {

struct EvalRow {
  std::string method;  // "model", "interpolation" or "ground_truth"
  int length = 0;
  double l2_cm = 0.0;
  double npss = 0.0;
  double foot_skate = 0.0;  // cm/frame
  double bone_error_cm = 0.0;
};

struct EvalReport {
  std::size_t clips = 0;
  std::size_t windows = 0;
  std::vector<int> lengths;
  std::vector<EvalRow> rows;
  LatencyStats latency;  // per generated frame, model rows only

  const EvalRow& row(const std::string& method, int length) const;
  /// key=value lines with a units header.
  std::string to_text() const;
  /// Methods as rows, one L2/NPSS/skate column group per length.
  std::string to_table() const;
};

/// Windowed test protocol: 65-frame windows with 25 overlap; for each window
/// and length n, frame 0 is the start and frame n the target, and the n-1
/// frames in between are compared against ground truth. The interpolation
/// baseline and the ground truth itself run through the same protocol.
/// Throws std::invalid_argument when no clip yields a window.
EvalReport evaluate(std::shared_ptr<const ModelBundle> bundle, const std::vector<data::MotionClip>& clips,
                    const std::vector<int>& lengths = {5, 15, 30}, std::uint64_t seed = 1,
                    Precision precision = Precision::Float);

/// Frames [first, first+count) of a clip.
data::MotionClip slice(const data::MotionClip& clip, std::size_t first, std::size_t count);

}  // namespace tween::engine
