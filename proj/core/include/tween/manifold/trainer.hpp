#pragma once

#include "tween/data/motion_clip.hpp"
#include "tween/manifold/model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tween::manifold {

using Sequence = std::vector<FrameState>;

/// Training sequences: every 50-frame window (25 overlap) split into two
/// 25-frame halves, each in its own canonical frame.
std::vector<Sequence> manifold_sequences(const std::vector<data::MotionClip>& clips);

struct ManifoldTrainConfig {
  int batch = 32;
  long stage1_iterations = 50000;
  long stage2_iterations = 50000;
  double lr_start = 1e-4;
  double lr_end = 1e-5;
  long lr_decay_iterations = 50000;
  double warmup_epochs = 10.0;
  double scheduled_sampling_k = 5.0;  // epochs
  double contact_threshold = 0.2;     // cm per frame
  std::uint64_t seed = 1;

  void validate() const;
  std::string to_text() const;
  static ManifoldTrainConfig from_text(const std::string& text);
};

/// 0 before epoch k, then linear to 1 at epoch 2k.
double scheduled_sampling_probability(double epoch, double k);
/// Linear decay from lr_start to lr_end over lr_decay_iterations, then flat.
double decayed_learning_rate(long iteration, const ManifoldTrainConfig& c);
/// Warm-up from 0 to lr_start over warmup_epochs, then the decay counted
/// from the end of warm-up.
double warmup_learning_rate(double epoch, long iterations_after_warmup, const ManifoldTrainConfig& c);

/// Divisors that bring each loss term to about 1 on the untrained network.
struct LossScales {
  double position_weight = 1.0;  // balances positions against rotations inside the reconstruction term
  double rec = 1.0;
  double kl = 1.0;
  double foot = 1.0;
  double bone = 1.0;
  bool calibrated = false;
};

struct ManifoldLogEntry {
  long iteration = 0;  // global, across stages
  int stage = 1;
  double sampling_p = 0.0;
  double lr = 0.0;
  double loss = 0.0;  // scaled objective
  double rec = 0.0;   // raw terms
  double kl = 0.0;
  double foot = 0.0;
  double bone = 0.0;
};

class ManifoldTrainer {
 public:
  ManifoldTrainer(Manifold& model, std::vector<Sequence> sequences, std::shared_ptr<const kin::Skeleton> skeleton,
                  ManifoldTrainConfig config);

  /// One optimizer step of the current stage. Calibrates first if needed.
  ManifoldLogEntry step();
  bool finished() const;
  /// Runs the remaining iterations of both stages.
  void run(const std::function<void(const ManifoldLogEntry&)>& on_step = {});

  void calibrate();
  /// Scaled objective of one batch of sequence indices. Stage 2 adds the foot
  /// and bone terms; `p` is the probability of feeding back predictions.
  /// Fills the raw terms of `terms` when given. Requires calibrated scales.
  Var objective(ad::Tape& tape, ad::Binding& bind, const std::vector<std::size_t>& picks, int stage, double p,
                ad::Rng& rng, ManifoldLogEntry* terms = nullptr) const;
  const LossScales& scales() const { return scales_; }

  long iteration() const { return iteration_; }
  int stage() const { return iteration_ < config_.stage1_iterations ? 1 : 2; }
  double epoch() const;
  double sampling_probability() const;
  double learning_rate() const;

  /// Mean per-joint lower-body position error (cm) of one-step reconstruction
  /// on every consecutive training pair, using z = mu.
  double reconstruction_error_cm() const;

  /// Model, optimizer and trainer state, enough to resume bit-identically.
  void save(ad::Checkpoint& ck) const;
  void load(const ad::Checkpoint& ck);

  const std::vector<Sequence>& sequences() const { return sequences_; }

 private:
  struct Terms {
    Var rec_pos_mse, rec_rot_mse, rec, kl, foot, bone;
  };
  Terms rollout(ad::Tape& tape, ad::Binding& bind, const std::vector<std::size_t>& picks, double p, ad::Rng& rng) const;
  std::vector<std::size_t> draw_batch(ad::Rng& rng) const;

  Manifold& model_;
  std::vector<Sequence> sequences_;
  std::shared_ptr<const kin::Skeleton> skeleton_;
  ManifoldTrainConfig config_;
  ad::Amsgrad optimizer_;
  ad::Rng rng_;
  LossScales scales_;
  long iteration_ = 0;
  std::vector<int> feet_;
};

}  // namespace tween::manifold
