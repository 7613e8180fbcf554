#pragma once

#include "tween/data/motion_clip.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace tween::data {

inline constexpr std::size_t kTrainWindowLength = 50;
inline constexpr std::size_t kEvalWindowLength = 65;
inline constexpr std::size_t kWindowOverlap = 25;

struct Window {
  std::size_t clip = 0;   // index into the corpus clip list
  std::size_t start = 0;  // first frame in the clip
  std::size_t length = 0;
};

/// Start frames of consecutive windows: 0, length-overlap, 2(length-overlap),
/// ...; a trailing remainder shorter than `length` is dropped.
std::vector<std::size_t> window_starts(std::size_t frame_count, std::size_t length, std::size_t overlap);

/// Windows over one clip. Throws std::invalid_argument unless length > overlap.
std::vector<Window> make_windows(const MotionClip& clip, std::size_t clip_index, std::size_t length,
                                 std::size_t overlap);
std::vector<Window> make_windows(const std::vector<MotionClip>& clips, std::size_t length, std::size_t overlap);

/// Disjoint partition into (train, test) where test holds exactly the clips
/// labeled `test_subject`. Throws if the label is empty or absent.
std::pair<std::vector<MotionClip>, std::vector<MotionClip>> split_by_subject(const std::vector<MotionClip>& clips,
                                                                             const std::string& test_subject);

}  // namespace tween::data
