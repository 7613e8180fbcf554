#pragma once

#include "tween/data/motion_clip.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tween::data {

struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest's directory
  std::string subject;
};

/// Manifest format: one "<relative bvh path> <subject>" pair per line; blank
/// lines and lines starting with '#' are ignored.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries);

/// Loads every clip in manifest order. All clips must share one skeleton
/// topology; they end up sharing a single Skeleton instance.
std::vector<MotionClip> load_corpus(const std::filesystem::path& manifest);

}  // namespace tween::data
