#include "tween/data/windows.hpp"

#include <stdexcept>

namespace tween::data {

std::vector<std::size_t> window_starts(std::size_t frame_count, std::size_t length, std::size_t overlap) {
  if (length <= overlap) throw std::invalid_argument("window length must exceed the overlap");
  std::vector<std::size_t> starts;
  const std::size_t stride = length - overlap;
  for (std::size_t s = 0; s + length <= frame_count; s += stride) starts.push_back(s);
  return starts;
}

std::vector<Window> make_windows(const MotionClip& clip, std::size_t clip_index, std::size_t length,
                                 std::size_t overlap) {
  std::vector<Window> out;
  for (std::size_t s : window_starts(clip.frame_count(), length, overlap)) out.push_back({clip_index, s, length});
  return out;
}

std::vector<Window> make_windows(const std::vector<MotionClip>& clips, std::size_t length, std::size_t overlap) {
  std::vector<Window> out;
  for (std::size_t c = 0; c < clips.size(); ++c) {
    auto w = make_windows(clips[c], c, length, overlap);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

std::pair<std::vector<MotionClip>, std::vector<MotionClip>> split_by_subject(const std::vector<MotionClip>& clips,
                                                                             const std::string& test_subject) {
  if (test_subject.empty()) throw std::invalid_argument("test subject label is empty");
  std::vector<MotionClip> train;
  std::vector<MotionClip> test;
  for (const auto& c : clips) {
    if (c.subject.empty()) throw std::invalid_argument("clip '" + c.name + "' has no subject label");
    (c.subject == test_subject ? test : train).push_back(c);
  }
  if (test.empty()) throw std::invalid_argument("unknown subject '" + test_subject + "'");
  return {std::move(train), std::move(test)};
}

}  // namespace tween::data
