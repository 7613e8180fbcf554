#pragma once

#include "tween/autodiff/amsgrad.hpp"
#include "tween/autodiff/tape.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace tween::ad {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Versioned binary container of named tensors and text blobs.
///
/// Layout (little-endian):
///   "TWNCKPT\0"  u32 version  u32 entry_count
///   per entry:   u32 name_len, name bytes, u8 kind
///     kind 0 (tensor): u64 rows, u64 cols, rows*cols f64 row-major
///     kind 1 (text):   u64 len, bytes
/// Tensors round-trip bit-exactly.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> texts;

  void put(const std::string& prefix, const ParameterSet& params);
  /// Copies values for every parameter in `params` from entries under
  /// `prefix`. Missing entries or shape mismatches throw.
  void get(const std::string& prefix, ParameterSet& params) const;

  void put(const std::string& prefix, const Amsgrad& opt);
  void get(const std::string& prefix, Amsgrad& opt) const;

  const std::string& text(const std::string& key) const;
  bool has_text(const std::string& key) const { return texts.count(key) != 0; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);
};

}  // namespace tween::ad
