#pragma once

#include "tween/data/norm_stats.hpp"
#include "tween/engine/inference.hpp"
#include "tween/manifold/model.hpp"
#include "tween/sampler/model.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace tween::engine {

inline constexpr int kBundleVersion = 1;

/// Everything generation needs, frozen after construction. Shared read-only
/// between sessions and threads.
class ModelBundle {
 public:
  ModelBundle(std::shared_ptr<const kin::Skeleton> skeleton, manifold::Manifold manifold, sampler::Sampler sampler,
              data::NormStats norm, std::map<std::string, std::string> metadata = {});

  /// Untrained bundle with the given layer sizes (benchmarks, smoke tests).
  static std::shared_ptr<const ModelBundle> random(std::shared_ptr<const kin::Skeleton> skeleton,
                                                   const manifold::ManifoldConfig& mc,
                                                   const sampler::SamplerConfig& sc, std::uint64_t seed);

  const kin::Skeleton& skeleton() const { return *skeleton_; }
  std::shared_ptr<const kin::Skeleton> skeleton_ptr() const { return skeleton_; }
  const manifold::Manifold& manifold() const { return manifold_; }
  const sampler::Sampler& sampler() const { return sampler_; }
  const data::NormStats& norm() const { return norm_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  const InferenceModel<float>& float_model() const { return float_; }
  const InferenceModel<double>& double_model() const { return double_; }

  ad::Checkpoint to_checkpoint() const;
  /// Throws CheckpointError on a missing section or version mismatch.
  static std::shared_ptr<const ModelBundle> from_checkpoint(const ad::Checkpoint& ck);

  void save(const std::filesystem::path& path) const;
  static std::shared_ptr<const ModelBundle> load(const std::filesystem::path& path);

 private:
  std::shared_ptr<const kin::Skeleton> skeleton_;
  manifold::Manifold manifold_;
  sampler::Sampler sampler_;
  data::NormStats norm_;
  std::map<std::string, std::string> metadata_;
  InferenceModel<float> float_;
  InferenceModel<double> double_;
};

/// Lossless text form of a skeleton (hexfloat offsets and rate).
std::string skeleton_to_text(const kin::Skeleton& skeleton);
std::shared_ptr<const kin::Skeleton> skeleton_from_text(const std::string& text);

}  // namespace tween::engine
