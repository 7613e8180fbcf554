#include "tween/engine/evaluate.hpp"

#include "tween/data/windows.hpp"
#include "tween/metrics/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace tween::engine {

data::MotionClip slice(const data::MotionClip& clip, std::size_t first, std::size_t count) {
  if (first + count > clip.frame_count()) throw std::out_of_range("slice exceeds clip");
  data::MotionClip out;
  out.skeleton = clip.skeleton;
  out.frame_rate = clip.frame_rate;
  out.subject = clip.subject;
  out.name = clip.name;
  const auto a = static_cast<std::ptrdiff_t>(first);
  const auto b = static_cast<std::ptrdiff_t>(first + count);
  out.root_positions.assign(clip.root_positions.begin() + a, clip.root_positions.begin() + b);
  out.rotations.assign(clip.rotations.begin() + a, clip.rotations.begin() + b);
  return out;
}

const EvalRow& EvalReport::row(const std::string& method, int length) const {
  for (const auto& r : rows) {
    if (r.method == method && r.length == length) return r;
  }
  throw std::out_of_range("no evaluation row for " + method + " at length " + std::to_string(length));
}

std::string EvalReport::to_text() const {
  std::ostringstream o;
  o.precision(9);
  o << "units.l2=cm\nunits.npss=1\nunits.foot_skate=cm/frame\nunits.bone_error=cm\nunits.latency=ms\n";
  o << "clips=" << clips << "\nwindows=" << windows << "\n";
  for (const auto& r : rows) {
    const std::string k = r.method + "." + std::to_string(r.length) + ".";
    o << k << "l2=" << r.l2_cm << '\n'
      << k << "npss=" << r.npss << '\n'
      << k << "foot_skate=" << r.foot_skate << '\n'
      << k << "bone_error=" << r.bone_error_cm << '\n';
  }
  o << "latency.samples=" << latency.samples << "\nlatency.mean=" << latency.mean_ms
    << "\nlatency.median=" << latency.median_ms << "\nlatency.p99=" << latency.p99_ms << '\n';
  return o.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream o;
  char buf[256];
  o << "L2 (cm) | NPSS | foot skate (cm/frame), " << windows << " windows\n";
  std::snprintf(buf, sizeof(buf), "%-14s", "length");
  o << buf;
  for (int n : lengths) {
    std::snprintf(buf, sizeof(buf), " | %8d %8d %8d", n, n, n);
    o << buf;
  }
  o << '\n';
  for (const char* m : {"interpolation", "model", "ground_truth"}) {
    std::snprintf(buf, sizeof(buf), "%-14s", m);
    o << buf;
    for (int n : lengths) {
      const EvalRow& r = row(m, n);
      std::snprintf(buf, sizeof(buf), " | %8.4f %8.4f %8.4f", r.l2_cm, r.npss, r.foot_skate);
      o << buf;
    }
    o << '\n';
  }
  return o.str();
}

EvalReport evaluate(std::shared_ptr<const ModelBundle> bundle, const std::vector<data::MotionClip>& clips,
                    const std::vector<int>& lengths, std::uint64_t seed, Precision precision) {
  if (clips.empty()) throw std::invalid_argument("evaluation needs at least one test clip");
  for (int n : lengths) {
    check_duration(n);
    if (n < 3) throw std::invalid_argument("evaluation lengths need at least two in-between frames");
    if (static_cast<std::size_t>(n) >= data::kEvalWindowLength) {
      throw std::invalid_argument("evaluation length " + std::to_string(n) + " does not fit a 65-frame window");
    }
  }
  const auto windows = data::make_windows(clips, data::kEvalWindowLength, data::kWindowOverlap);
  if (windows.empty()) throw std::invalid_argument("no test clip is long enough for a 65-frame window");

  EvalReport rep;
  rep.clips = clips.size();
  rep.windows = windows.size();
  rep.lengths = lengths;
  std::vector<data::ClipKinematics> kin;
  for (const auto& c : clips) kin.push_back(data::compute_kinematics(c));

  std::vector<double> timings;
  for (int n : lengths) {
    EvalRow model{"model", n}, interp{"interpolation", n}, truth{"ground_truth", n};
    const auto count = static_cast<std::size_t>(n);
    for (const auto& w : windows) {
      const data::MotionClip& clip = clips[w.clip];
      const data::CanonicalFrame frame = data::frame_at(clip, w.start);
      const auto states = data::extract_frames(clip, kin[w.clip], w.start, count + 1, frame);
      Session session(bundle, states.front(), frame, seed, precision);
      Transition t = session.advance(states.back(), n);
      timings.insert(timings.end(), t.per_frame_ms.begin(), t.per_frame_ms.end());

      const data::MotionClip gt = slice(clip, w.start, count);
      const data::MotionClip base =
          interpolate_baseline(clip.skeleton, data::pose_of(clip, w.start), data::pose_of(clip, w.start + count), n);
      const data::MotionClip gt_mid = slice(gt, 1, count - 1);
      auto score = [&](EvalRow& r, const data::MotionClip& pred) {
        const data::MotionClip mid = slice(pred, 1, count - 1);
        r.l2_cm += metrics::l2_global(mid, gt_mid);
        r.npss += metrics::npss(metrics::rotation_features(mid), metrics::rotation_features(gt_mid));
        r.foot_skate += metrics::foot_skate(pred);
        r.bone_error_cm += metrics::bone_length_error(mid);
      };
      score(model, t.clip);
      score(interp, base);
      score(truth, gt);
    }
    for (EvalRow* r : {&model, &interp, &truth}) {
      const auto k = static_cast<double>(windows.size());
      r->l2_cm /= k;
      r->npss /= k;
      r->foot_skate /= k;
      r->bone_error_cm /= k;
      rep.rows.push_back(*r);
    }
  }
  rep.latency = latency_stats(std::move(timings));
  return rep;
}

}  // namespace tween::engine
