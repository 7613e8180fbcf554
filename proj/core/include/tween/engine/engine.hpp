#pragma once

#include "tween/data/features.hpp"
#include "tween/engine/bundle.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tween::engine {

inline constexpr int kMinDuration = 2;
inline constexpr int kMaxDuration = 1000;
/// Longest duration seen in training; anything above is extrapolation.
inline constexpr int kTrainedMaxDuration = 30;

enum class Precision { Float, Double };

class DurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// World-space keyframe. Velocities come from `previous` (one frame earlier)
/// when given, otherwise they are zero.
struct Keyframe {
  data::Pose pose;
  std::optional<data::Pose> previous;
};

struct Transition {
  data::MotionClip clip;                 // world space: start frame plus n-1 generated frames
  std::vector<kin::FrameState> states;   // the same frames in `frame`
  data::CanonicalFrame frame;            // canonical frame of the start
  bool extrapolation = false;            // duration beyond the trained range
  std::vector<double> per_frame_ms;      // wall time of each generated frame
};

/// Generation state: current frame, recurrent state and noise generator.
/// Owns no model data; any number of sessions can share one bundle, each
/// used by one thread at a time.
class Session {
 public:
  Session(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start, std::uint64_t seed,
          Precision precision = Precision::Float);
  /// Starts from a feature-space state expressed in `frame`.
  Session(std::shared_ptr<const ModelBundle> bundle, const kin::FrameState& start, const data::CanonicalFrame& frame,
          std::uint64_t seed, Precision precision = Precision::Float);

  /// Generates toward `target`, reached after n frames. The returned clip
  /// starts at the current frame and stops before the target. The session
  /// then continues from the last generated frame.
  Transition advance(const Keyframe& target, int n);
  /// Same with a target state expressed in the canonical frame of the
  /// current frame (see current_frame()).
  Transition advance(const kin::FrameState& target, int n);

  /// Canonical frame anchored at the current frame's hip.
  const data::CanonicalFrame& current_frame() const { return frame_; }
  const kin::FrameState& current_state() const { return current_; }
  data::Pose current_pose() const;
  int segments() const { return segments_; }

 private:
  template <typename S>
  Transition run(const InferenceModel<S>& model, const kin::FrameState& target, int n);
  void recenter();

  std::shared_ptr<const ModelBundle> bundle_;
  Precision precision_;
  ad::Rng rng_;
  kin::FrameState current_;
  data::CanonicalFrame frame_;
  InferenceModel<float>::Recurrent rec_f_;
  InferenceModel<double>::Recurrent rec_d_;
  int segments_ = 0;
};

/// Throws DurationError unless n is in [2, 1000].
void check_duration(int n);

/// One transition from `start` to `target` over n frames.
Transition generate(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start, const Keyframe& target, int n,
                    std::uint64_t seed, Precision precision = Precision::Float);

struct ChainSegment {
  Keyframe target;
  int duration = 0;
};

/// Consecutive transitions, each starting at the previous segment's last
/// generated frame with the recurrent state carried over. Junction frames
/// are not repeated: total length is the sum of (duration - 1) plus one.
data::MotionClip chain(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start,
                       const std::vector<ChainSegment>& segments, std::uint64_t seed,
                       Precision precision = Precision::Float);

/// Linear root and slerped joint rotations at t = i/n, i = 0..n-1.
data::MotionClip interpolate_baseline(std::shared_ptr<const kin::Skeleton> skeleton, const data::Pose& start,
                                      const data::Pose& target, int n);

struct LatencyStats {
  std::size_t samples = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

/// Statistics of a list of per-frame timings. Throws std::invalid_argument on
/// an empty list.
LatencyStats latency_stats(std::vector<double> samples_ms);

/// Times `iterations` single frames (sampler step, decode, assembly) after a
/// short warm-up, looping 30-frame transitions from the rest pose.
LatencyStats bench_latency(const ModelBundle& bundle, std::size_t iterations, Precision precision = Precision::Float);

}  // namespace tween::engine
