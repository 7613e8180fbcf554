#pragma once

#include "run_config.hpp"

#include "tween/engine/engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace tween::cli {

namespace fs = std::filesystem;

struct CorpusOptions {
  fs::path out = "data/corpus";
  std::string style = "lafan";
  int subjects = 5;
  int clips_per_subject = 1;
  int frames = 300;
  std::uint64_t seed = 100;
};

struct GenerateOptions {
  fs::path bundle;
  fs::path start;
  int start_frame = 0;
  fs::path target;  // defaults to the start file
  int target_frame = -1;  // defaults to start_frame + duration
  int duration = 30;
  std::uint64_t seed = 1;
  fs::path out = "transition.bvh";
  bool double_precision = false;
};

struct EvaluateOptions {
  fs::path bundle;
  fs::path corpus;
  std::string test_subject;
  fs::path out = "eval";
  std::uint64_t seed = 1;
};

struct BenchOptions {
  std::optional<fs::path> bundle;  // paper-size untrained networks when absent
  std::size_t iterations = 2000;
  bool double_precision = false;
};

struct ServeOptions {
  std::optional<fs::path> bundle;
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path static_dir;
};

/// Paper GPU figure the latency benchmark is reported against.
inline constexpr double kPaperMsPerFrame = 2.1;

void cmd_make_corpus(const CorpusOptions& o, std::ostream& log);
void cmd_train_manifold(const RunConfig& c, bool resume, std::ostream& log);
/// Reads `<out>/manifold.ckpt` unless `manifold` is given; writes
/// `<out>/sampler.ckpt` and the final `<out>/bundle.twn`.
void cmd_train_sampler(const RunConfig& c, const std::optional<fs::path>& manifold, bool resume, std::ostream& log);
void cmd_generate(const GenerateOptions& o, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& o, std::ostream& log);
void cmd_bench(const BenchOptions& o, std::ostream& log);
void cmd_serve(const ServeOptions& o, std::ostream& log);

/// Keyframe from a clip frame, with the preceding frame for velocities.
engine::Keyframe keyframe_of(const data::MotionClip& clip, int frame);

}  // namespace tween::cli
