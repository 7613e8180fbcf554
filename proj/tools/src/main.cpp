#include "commands.hpp"

#include "tween/version.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace tween::cli;

namespace {

RunConfig run_config(const std::string& path, const std::optional<std::uint64_t>& seed, const std::string& out) {
  if (path.empty()) throw std::runtime_error("--config is required");
  RunConfig c = load_run_config(path);
  if (seed) c.set_seed(*seed);
  if (!out.empty()) c.out = out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion in-betweening: train, generate, evaluate, benchmark and serve"};
  app.set_version_flag("--version", std::string(tween::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool resume = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
  };

  auto* tm = app.add_subcommand("train-manifold", "train the motion manifold");
  common(tm);
  tm->add_flag("--resume", resume, "continue from <out>/manifold.ckpt");

  std::string manifold_ckpt;
  auto* ts = app.add_subcommand("train-sampler", "train the transition sampler against a frozen manifold");
  common(ts);
  ts->add_flag("--resume", resume, "continue from <out>/sampler.ckpt");
  ts->add_option("--manifold", manifold_ckpt, "manifold checkpoint (default <out>/manifold.ckpt)");

  GenerateOptions gen;
  std::string gen_out;
  auto* g = app.add_subcommand("generate", "synthesize a transition between two BVH frames");
  g->add_option("--bundle", gen.bundle, "model bundle")->required()->check(CLI::ExistingFile);
  g->add_option("--start", gen.start, "BVH holding the start frame")->required()->check(CLI::ExistingFile);
  g->add_option("--start-frame", gen.start_frame, "start frame index");
  g->add_option("--target", gen.target, "BVH holding the target frame (default: the start file)");
  g->add_option("--target-frame", gen.target_frame, "target frame index (default: start frame + duration)");
  g->add_option("--duration", gen.duration, "frames from start to target, 2..1000");
  g->add_option("--seed", seed, "noise seed");
  g->add_option("--out", gen_out, "output BVH path");
  g->add_flag("--double", gen.double_precision, "run the 64-bit inference path");

  EvaluateOptions ev;
  std::string ev_out;
  auto* e = app.add_subcommand("evaluate", "windowed test protocol with the interpolation baseline");
  e->add_option("--bundle", ev.bundle, "model bundle")->required()->check(CLI::ExistingFile);
  e->add_option("--corpus", ev.corpus, "corpus manifest")->check(CLI::ExistingFile);
  e->add_option("--test-subject", ev.test_subject, "evaluate only this subject's clips");
  common(e);

  BenchOptions bo;
  std::string bench_bundle;
  auto* b = app.add_subcommand("bench", "per-frame synthesis latency");
  b->add_option("--bundle", bench_bundle, "model bundle (default: untrained paper-size networks)")
      ->check(CLI::ExistingFile);
  b->add_option("--iterations", bo.iterations, "timed frames");
  b->add_flag("--double", bo.double_precision, "time the 64-bit path");

  ServeOptions so;
  std::string serve_bundle;
  auto* s = app.add_subcommand("serve", "HTTP/JSON generation service");
  s->add_option("--bundle", serve_bundle, "model bundle");
  s->add_option("--host", so.host, "listen address");
  s->add_option("--port", so.port, "listen port");
  s->add_option("--static", so.static_dir, "directory served at /");

  CorpusOptions co;
  auto* mc = app.add_subcommand("make-corpus", "write the procedural walking corpus as BVH plus manifest");
  mc->add_option("--out", co.out, "output directory");
  mc->add_option("--style", co.style, "lafan or h36m")->check(CLI::IsMember({"lafan", "h36m"}));
  mc->add_option("--subjects", co.subjects, "number of subjects");
  mc->add_option("--clips", co.clips_per_subject, "clips per subject");
  mc->add_option("--frames", co.frames, "frames per clip");
  mc->add_option("--seed", co.seed, "first gait seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tm->parsed()) {
      cmd_train_manifold(run_config(config, seed, out), resume, std::cout);
    } else if (ts->parsed()) {
      std::optional<fs::path> mp;
      if (!manifold_ckpt.empty()) mp = manifold_ckpt;
      cmd_train_sampler(run_config(config, seed, out), mp, resume, std::cout);
    } else if (g->parsed()) {
      if (seed) gen.seed = *seed;
      if (!gen_out.empty()) gen.out = gen_out;
      cmd_generate(gen, std::cout);
    } else if (e->parsed()) {
      if (seed) ev.seed = *seed;
      if (!out.empty()) ev.out = out;
      if (!config.empty()) {
        const RunConfig c = load_run_config(config);
        if (ev.corpus.empty()) ev.corpus = c.corpus;
        if (ev.test_subject.empty()) ev.test_subject = c.test_subject;
      }
      if (ev.corpus.empty()) throw std::runtime_error("evaluate needs --corpus or --config");
      cmd_evaluate(ev, std::cout);
    } else if (b->parsed()) {
      if (!bench_bundle.empty()) bo.bundle = bench_bundle;
      cmd_bench(bo, std::cout);
    } else if (s->parsed()) {
      if (!serve_bundle.empty()) so.bundle = serve_bundle;
      cmd_serve(so, std::cout);
    } else if (mc->parsed()) {
      cmd_make_corpus(co, std::cout);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
