#include "commands.hpp"

#include "service.hpp"

#include "tween/data/bvh.hpp"
#include "tween/data/corpus.hpp"
#include "tween/data/procedural.hpp"
#include "tween/data/windows.hpp"
#include "tween/engine/evaluate.hpp"
#include "tween/metrics/metrics.hpp"
#include "tween/util/kv_text.hpp"

#include "httplib.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tween::cli {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_atomic(const ad::Checkpoint& ck, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  ck.save(tmp);
  fs::rename(tmp, path);
}

std::vector<data::MotionClip> training_clips(const RunConfig& c, std::ostream& log) {
  if (c.corpus.empty()) throw std::runtime_error("config does not name a corpus manifest");
  auto clips = data::load_corpus(c.corpus);
  const int expected = c.style == "lafan" ? 22 : 21;
  if (clips.front().skeleton->joint_count() != expected) {
    throw std::runtime_error("corpus skeleton has " + std::to_string(clips.front().skeleton->joint_count()) +
                             " joints but style '" + c.style + "' expects " + std::to_string(expected));
  }
  if (!c.test_subject.empty()) clips = data::split_by_subject(clips, c.test_subject).first;
  if (clips.empty()) throw std::runtime_error("no training clips left after holding out '" + c.test_subject + "'");
  std::size_t frames = 0;
  for (const auto& clip : clips) frames += clip.frame_count();
  log << "training corpus: " << clips.size() << " clips, " << frames << " frames\n";
  return clips;
}

// Keeps the log lines of iterations before `iteration` (resume).
void truncate_log(const fs::path& path, long iteration) {
  std::ifstream in(path);
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#' || std::stol(line.substr(0, line.find('\t'))) < iteration) keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

void check_skeleton(const ad::Checkpoint& ck, const kin::Skeleton& sk, const fs::path& path) {
  if (!ck.has_text("bundle.skeleton")) throw std::runtime_error(path.string() + " does not record its skeleton");
  if (!engine::skeleton_from_text(ck.text("bundle.skeleton"))->same_topology(sk, 1e-6)) {
    throw std::runtime_error(path.string() + " was trained on a different skeleton than the corpus");
  }
}

std::shared_ptr<const kin::Skeleton> style_skeleton(const std::string& style) {
  if (style == "lafan") return std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like());
  if (style == "h36m") return std::make_shared<const kin::Skeleton>(kin::Skeleton::h36m_like());
  throw std::runtime_error("unknown style '" + style + "'");
}

}  // namespace

engine::Keyframe keyframe_of(const data::MotionClip& clip, int frame) {
  if (frame < 0 || static_cast<std::size_t>(frame) >= clip.frame_count()) {
    throw std::runtime_error("frame " + std::to_string(frame) + " is outside the clip (" +
                             std::to_string(clip.frame_count()) + " frames)");
  }
  engine::Keyframe k;
  k.pose = data::pose_of(clip, static_cast<std::size_t>(frame));
  if (frame > 0) k.previous = data::pose_of(clip, static_cast<std::size_t>(frame - 1));
  return k;
}

void cmd_make_corpus(const CorpusOptions& o, std::ostream& log) {
  if (o.subjects < 1 || o.clips_per_subject < 1 || o.frames < 2) throw std::runtime_error("invalid corpus size");
  const auto sk = style_skeleton(o.style);
  fs::create_directories(o.out);
  std::vector<data::ManifestEntry> entries;
  for (int s = 1; s <= o.subjects; ++s) {
    for (int k = 1; k <= o.clips_per_subject; ++k) {
      const std::uint64_t seed = o.seed + static_cast<std::uint64_t>((s - 1) * o.clips_per_subject + (k - 1));
      data::MotionClip clip = data::generate_walk(sk, static_cast<std::size_t>(o.frames), data::random_gait(seed));
      const std::string name = "subject" + std::to_string(s) + "_walk" + std::to_string(k) + ".bvh";
      data::save_bvh(o.out / name, clip);
      entries.push_back({name, "subject" + std::to_string(s)});
      log << name << ": " << o.frames << " frames, foot skate " << metrics::foot_skate(clip) << " cm/frame\n";
    }
  }
  data::write_manifest(o.out / "manifest.txt", entries);
  log << "wrote " << (o.out / "manifest.txt").string() << '\n';
}

void cmd_train_manifold(const RunConfig& c, bool resume, std::ostream& log) {
  const auto clips = training_clips(c, log);
  const auto& sk = clips.front().skeleton;
  const auto seqs = manifold::manifold_sequences(clips);
  log << "manifold sequences: " << seqs.size() << '\n';
  manifold::Manifold m(c.manifold, c.seed);
  manifold::ManifoldTrainer tr(m, seqs, sk, c.manifold_training);

  fs::create_directories(c.out);
  const fs::path ckpt = c.out / "manifold.ckpt";
  const fs::path log_path = c.out / "manifold_log.tsv";
  if (resume && fs::exists(ckpt)) {
    const ad::Checkpoint ck = ad::Checkpoint::load(ckpt);
    check_skeleton(ck, *sk, ckpt);
    tr.load(ck);
    truncate_log(log_path, tr.iteration());
    log << "resuming at iteration " << tr.iteration() << '\n';
  } else {
    std::ofstream(log_path, std::ios::trunc) << "# iteration\tstage\tsampling_p\tlr\tloss\trec\tkl\tfoot\tbone\n";
  }
  std::ofstream out(log_path, std::ios::app);
  auto save = [&] {
    ad::Checkpoint ck;
    tr.save(ck);
    ck.texts["bundle.skeleton"] = engine::skeleton_to_text(*sk);
    ck.texts["run.config"] = run_config_json(c);
    save_atomic(ck, ckpt);
  };
  tr.run([&](const manifold::ManifoldLogEntry& e) {
    out << e.iteration << '\t' << e.stage << '\t' << fmt17(e.sampling_p) << '\t' << fmt17(e.lr) << '\t'
        << fmt17(e.loss) << '\t' << fmt17(e.rec) << '\t' << fmt17(e.kl) << '\t' << fmt17(e.foot) << '\t'
        << fmt17(e.bone) << '\n';
    if ((e.iteration + 1) % c.checkpoint_every == 0) {
      out.flush();
      save();
      log << "iteration " << e.iteration + 1 << " loss " << e.loss << '\n';
    }
  });
  out.flush();
  save();
  log << "one-step lower-body reconstruction error: " << tr.reconstruction_error_cm() << " cm\n"
      << "wrote " << ckpt.string() << '\n';
}

void cmd_train_sampler(const RunConfig& c, const std::optional<fs::path>& manifold_path, bool resume,
                       std::ostream& log) {
  const auto clips = training_clips(c, log);
  const auto sk = clips.front().skeleton;
  const fs::path mpath = manifold_path ? *manifold_path : c.out / "manifold.ckpt";
  const ad::Checkpoint mck = ad::Checkpoint::load(mpath);
  check_skeleton(mck, *sk, mpath);
  const manifold::Manifold m = manifold::Manifold::load(mck, "manifold.");
  const ad::ParameterSet frozen = m.params();

  auto data = std::make_shared<const sampler::TransitionData>(clips);
  const data::NormStats norm = data::NormStats::compute(data->all_window_frames());
  log << "sampler training windows: " << data->window_count() << '\n';
  sampler::Sampler s(c.sampler, m.config().latent, sk->upper_count(), c.seed + 1);
  sampler::SamplerTrainer tr(s, m, data, norm, c.sampler_training);

  fs::create_directories(c.out);
  const fs::path ckpt = c.out / "sampler.ckpt";
  const fs::path log_path = c.out / "sampler_log.tsv";
  if (resume && fs::exists(ckpt)) {
    const ad::Checkpoint ck = ad::Checkpoint::load(ckpt);
    check_skeleton(ck, *sk, ckpt);
    tr.load(ck);
    truncate_log(log_path, tr.iteration());
    log << "resuming at iteration " << tr.iteration() << '\n';
  } else {
    std::ofstream(log_path, std::ios::trunc)
        << "# iteration\tlength\tloss\trot\tleg\tpos_rot\tfoot\tbone\tfinal_error_cm\n";
  }
  std::ofstream out(log_path, std::ios::app);
  auto save = [&] {
    ad::Checkpoint ck;
    tr.save(ck);
    ck.texts["bundle.skeleton"] = engine::skeleton_to_text(*sk);
    ck.texts["run.config"] = run_config_json(c);
    save_atomic(ck, ckpt);
  };
  tr.run([&](const sampler::SamplerLogEntry& e) {
    out << e.iteration << '\t' << e.length << '\t' << fmt17(e.loss) << '\t' << fmt17(e.rot) << '\t' << fmt17(e.leg)
        << '\t' << fmt17(e.pos_rot) << '\t' << fmt17(e.foot) << '\t' << fmt17(e.bone) << '\t'
        << fmt17(e.final_error_cm) << '\n';
    if ((e.iteration + 1) % c.checkpoint_every == 0) {
      out.flush();
      save();
      log << "iteration " << e.iteration + 1 << " loss " << e.loss << '\n';
    }
  });
  out.flush();
  save();
  if (!(m.params() == frozen)) throw std::logic_error("manifold parameters changed during sampler training");

  std::map<std::string, std::string> meta{{"seed", std::to_string(c.seed)},
                                          {"sampler_iterations", std::to_string(tr.iteration())},
                                          {"corpus", c.corpus.string()}};
  if (mck.has_text("manifold.trainer")) {
    const auto kv = util::parse_kv(mck.text("manifold.trainer"));
    if (kv.count("iteration") != 0) meta["manifold_iterations"] = kv.at("iteration");
  }
  const engine::ModelBundle bundle(sk, m, s, norm, meta);
  const fs::path bpath = c.out / "bundle.twn";
  save_atomic(bundle.to_checkpoint(), bpath);
  log << "manifold unchanged by sampler training\nwrote " << bpath.string() << '\n';
}

void cmd_generate(const GenerateOptions& o, std::ostream& log) {
  const auto bundle = engine::ModelBundle::load(o.bundle);
  const data::MotionClip start_clip = data::load_bvh(o.start);
  const data::MotionClip target_clip = o.target.empty() ? start_clip : data::load_bvh(o.target);
  for (const auto* clip : {&start_clip, &target_clip}) {
    if (!clip->skeleton->same_topology(bundle->skeleton(), 1e-4)) {
      throw std::runtime_error("input BVH skeleton does not match the bundle skeleton");
    }
  }
  const int target_frame = o.target_frame >= 0 ? o.target_frame : o.start_frame + o.duration;
  engine::check_duration(o.duration);
  const engine::Transition t =
      engine::generate(bundle, keyframe_of(start_clip, o.start_frame), keyframe_of(target_clip, target_frame),
                       o.duration, o.seed, o.double_precision ? engine::Precision::Double : engine::Precision::Float);
  data::MotionClip clip = t.clip;
  clip.skeleton = start_clip.skeleton;  // keep the input's channel layout
  data::save_bvh(o.out, clip);
  const engine::LatencyStats lat = engine::latency_stats(t.per_frame_ms);
  log << "frames=" << clip.frame_count() << "\nextrapolation=" << (t.extrapolation ? 1 : 0)
      << "\nfoot_skate_cm_per_frame=" << metrics::foot_skate(clip)
      << "\nbone_error_cm=" << metrics::bone_length_error(clip) << "\nmean_ms_per_frame=" << lat.mean_ms
      << "\nwrote " << o.out.string() << '\n';
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  const auto bundle = engine::ModelBundle::load(o.bundle);
  auto clips = data::load_corpus(o.corpus);
  if (!o.test_subject.empty()) clips = data::split_by_subject(clips, o.test_subject).second;
  if (clips.empty()) throw std::runtime_error("evaluation corpus is empty");
  const engine::EvalReport rep = engine::evaluate(bundle, clips, {5, 15, 30}, o.seed);
  fs::create_directories(o.out);
  std::ofstream(o.out / "eval.txt") << rep.to_text();
  std::ofstream(o.out / "eval_table.txt") << rep.to_table();
  log << "evaluated " << rep.windows << " windows from " << rep.clips << " clips\n" << rep.to_table();
}

void cmd_bench(const BenchOptions& o, std::ostream& log) {
  std::shared_ptr<const engine::ModelBundle> bundle;
  if (o.bundle) {
    bundle = engine::ModelBundle::load(*o.bundle);
  } else {
    bundle = engine::ModelBundle::random(std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like()), {}, {}, 1);
    log << "untrained networks at paper sizes (encoders 512/256, LSTM 1024, 6 experts x 256)\n";
  }
  const auto p = o.double_precision ? engine::Precision::Double : engine::Precision::Float;
  const engine::LatencyStats s = engine::bench_latency(*bundle, o.iterations, p);
  log << std::fixed << std::setprecision(3) << "precision " << (o.double_precision ? "double" : "float")
      << ", single thread, " << s.samples << " frames\n"
      << "per-frame ms: mean " << s.mean_ms << " median " << s.median_ms << " p99 " << s.p99_ms << " max "
      << s.max_ms << "\npaper: " << kPaperMsPerFrame << " ms per frame on a GPU\n";
}

void cmd_serve(const ServeOptions& o, std::ostream& log) {
  std::shared_ptr<const engine::ModelBundle> bundle;
  if (o.bundle) {
    try {
      bundle = engine::ModelBundle::load(*o.bundle);
    } catch (const std::exception& e) {
      log << "bundle not loaded (" << e.what() << "); generation endpoints answer 503\n";
    }
  }
  Service service(bundle, o.static_dir);
  httplib::Server server;
  service.mount(server);
  log << "listening on http://" << o.host << ':' << o.port << '\n' << std::flush;
  if (!server.listen(o.host, o.port)) throw std::runtime_error("cannot listen on " + o.host + ":" + std::to_string(o.port));
}

}  // namespace tween::cli
