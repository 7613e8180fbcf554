#pragma once

#include "tween/data/features.hpp"
#include "tween/sampler/losses.hpp"
#include "tween/sampler/model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tween::sampler {

using kin::FrameState;

struct SamplerTrainConfig {
  int batch = 32;
  long iterations = 300000;
  double lr = 1e-3;
  double lr_end = 1e-4;
  long lr_decay_iterations = 0;  // 0 keeps lr constant
  int min_length = 5;
  int max_length = 30;
  int warmup_frames = 0;  // context frames run through the recurrent cell before the start frame
  std::uint64_t seed = 1;
  SamplerLossWeights weights;

  void validate() const;
  std::string to_text() const;
  static SamplerTrainConfig from_text(const std::string& text);
  /// lr at `iteration`: linear from lr to lr_end over lr_decay_iterations.
  double learning_rate(long iteration) const;
};

struct SamplerLogEntry {
  long iteration = 0;
  int length = 0;  // transition duration n of this step
  double loss = 0.0;
  double rot = 0.0;
  double leg = 0.0;
  double pos_rot = 0.0;
  double foot = 0.0;
  double bone = 0.0;
  double final_error_cm = 0.0;  // mean lower-joint error of the last generated frame
};

/// Source of transition examples: 50-frame windows (25 overlap) of the
/// training clips.
class TransitionData {
 public:
  TransitionData(std::vector<data::MotionClip> clips);

  std::size_t window_count() const { return windows_.size(); }
  /// Frames [start - context, start + n] of window `w`, in the canonical
  /// frame of `start` (offset within the window).
  std::vector<FrameState> example(std::size_t w, std::size_t start, int n, int context = 0) const;
  const kin::Skeleton& skeleton() const { return *clips_.front().skeleton; }
  std::shared_ptr<const kin::Skeleton> skeleton_ptr() const { return clips_.front().skeleton; }
  /// All window frames, each window in its own canonical frame.
  std::vector<FrameState> all_window_frames() const;

 private:
  std::vector<data::MotionClip> clips_;
  std::vector<data::ClipKinematics> kinematics_;
  struct Win {
    std::size_t clip;
    std::size_t start;
  };
  std::vector<Win> windows_;
};

class SamplerTrainer {
 public:
  SamplerTrainer(Sampler& sampler, const manifold::Manifold& manifold, std::shared_ptr<const TransitionData> data,
                 data::NormStats norm, SamplerTrainConfig config);

  SamplerLogEntry step();
  bool finished() const { return iteration_ >= config_.iterations; }
  void run(const std::function<void(const SamplerLogEntry&)>& on_step = {});
  long iteration() const { return iteration_; }

  /// Mean lower-joint position error (cm) of the last generated frame against
  /// the true frame at the same index, over every training window starting
  /// at the window's first frame, for transition duration n. Noise uses a
  /// fixed seed.
  double final_frame_error_cm(int n) const;

  void save(ad::Checkpoint& ck) const;
  void load(const ad::Checkpoint& ck);

 private:
  Sampler& sampler_;
  const manifold::Manifold& manifold_;
  std::shared_ptr<const TransitionData> data_;
  data::NormStats norm_;
  SamplerTrainConfig config_;
  ad::Amsgrad optimizer_;
  ad::Rng rng_;
  long iteration_ = 0;
};

}  // namespace tween::sampler
