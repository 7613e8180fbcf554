#include "tween/engine/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace tween::engine {
namespace {

void check_pose(const kin::Skeleton& sk, const data::Pose& p, const char* what) {
  if (static_cast<int>(p.rotations.size()) != sk.joint_count()) {
    throw std::invalid_argument(std::string(what) + " has " + std::to_string(p.rotations.size()) +
                                " joint rotations, skeleton has " + std::to_string(sk.joint_count()));
  }
  if (!p.root.allFinite()) throw std::invalid_argument(std::string(what) + " root position is not finite");
}

kin::FrameState keyframe_state(const kin::Skeleton& sk, const Keyframe& k, const data::CanonicalFrame& frame,
                               const char* what) {
  check_pose(sk, k.pose, what);
  if (k.previous) check_pose(sk, *k.previous, what);
  return data::state_from_pose(sk, k.pose, k.previous ? &*k.previous : nullptr, sk.frame_rate(), frame);
}

data::CanonicalFrame frame_of(const data::Pose& p) {
  return data::CanonicalFrame::of(p.root, kin::sixd_to_matrix(p.rotations.at(0)));
}

data::Pose rest_pose(const kin::Skeleton& sk) {
  return data::Pose{sk.offset(0), std::vector<kin::Rotation6D>(static_cast<std::size_t>(sk.joint_count()))};
}

}  // namespace

void check_duration(int n) {
  if (n < kMinDuration || n > kMaxDuration) {
    throw DurationError("transition duration " + std::to_string(n) + " is outside [" + std::to_string(kMinDuration) +
                        ", " + std::to_string(kMaxDuration) + "]");
  }
}

Session::Session(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start, std::uint64_t seed,
                 Precision precision)
    : bundle_(std::move(bundle)), precision_(precision), rng_(seed) {
  if (!bundle_) throw std::invalid_argument("session needs a model bundle");
  check_pose(bundle_->skeleton(), start.pose, "start pose");
  frame_ = frame_of(start.pose);
  current_ = keyframe_state(bundle_->skeleton(), start, frame_, "start pose");
  rec_f_ = bundle_->float_model().zero_state();
  rec_d_ = bundle_->double_model().zero_state();
}

Session::Session(std::shared_ptr<const ModelBundle> bundle, const kin::FrameState& start,
                 const data::CanonicalFrame& frame, std::uint64_t seed, Precision precision)
    : bundle_(std::move(bundle)), precision_(precision), rng_(seed), current_(start), frame_(frame) {
  if (!bundle_) throw std::invalid_argument("session needs a model bundle");
  current_.check_against(bundle_->skeleton());
  rec_f_ = bundle_->float_model().zero_state();
  rec_d_ = bundle_->double_model().zero_state();
}

data::Pose Session::current_pose() const { return data::state_to_pose(bundle_->skeleton(), current_, frame_); }

Transition Session::advance(const Keyframe& target, int n) {
  check_duration(n);
  return advance(keyframe_state(bundle_->skeleton(), target, frame_, "target pose"), n);
}

Transition Session::advance(const kin::FrameState& target, int n) {
  check_duration(n);
  target.check_against(bundle_->skeleton());
  return precision_ == Precision::Float ? run(bundle_->float_model(), target, n)
                                        : run(bundle_->double_model(), target, n);
}

template <typename S>
Transition Session::run(const InferenceModel<S>& model, const kin::FrameState& target, int n) {
  auto& rec = [&]() -> typename InferenceModel<S>::Recurrent& {
    if constexpr (std::is_same_v<S, float>) {
      return rec_f_;
    } else {
      return rec_d_;
    }
  }();
  const auto cache = model.prepare(target);
  Transition t;
  t.frame = frame_;
  t.extrapolation = n > kTrainedMaxDuration;
  t.states.reserve(static_cast<std::size_t>(n));
  t.states.push_back(current_);
  for (int k = 1; k < n; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    t.states.push_back(model.step(t.states.back(), cache, rec, static_cast<double>(n - k), &rng_));
    t.per_frame_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  t.clip = data::states_to_clip(bundle_->skeleton_ptr(), t.states, frame_);
  current_ = t.states.back();
  ++segments_;
  recenter();
  return t;
}

void Session::recenter() {
  const kin::Vec3 hip = frame_.point_to_world(current_.p_h);
  const kin::Mat3 rot = frame_.rotation_to_world(kin::sixd_to_matrix(current_.r_h));
  const data::CanonicalFrame next = data::CanonicalFrame::of(hip, rot);
  current_ = data::rebase(current_, frame_, next);
  frame_ = next;
}

Transition generate(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start, const Keyframe& target, int n,
                    std::uint64_t seed, Precision precision) {
  check_duration(n);
  Session s(std::move(bundle), start, seed, precision);
  return s.advance(target, n);
}

data::MotionClip chain(std::shared_ptr<const ModelBundle> bundle, const Keyframe& start,
                       const std::vector<ChainSegment>& segments, std::uint64_t seed, Precision precision) {
  if (segments.empty()) throw std::invalid_argument("chain needs at least one segment");
  for (const auto& seg : segments) check_duration(seg.duration);
  Session s(std::move(bundle), start, seed, precision);
  data::MotionClip out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    Transition t = s.advance(segments[i].target, segments[i].duration);
    if (i == 0) {
      out = std::move(t.clip);
      continue;
    }
    out.root_positions.insert(out.root_positions.end(), t.clip.root_positions.begin() + 1, t.clip.root_positions.end());
    out.rotations.insert(out.rotations.end(), t.clip.rotations.begin() + 1, t.clip.rotations.end());
  }
  return out;
}

data::MotionClip interpolate_baseline(std::shared_ptr<const kin::Skeleton> skeleton, const data::Pose& start,
                                      const data::Pose& target, int n) {
  if (n < kMinDuration) throw DurationError("interpolation needs at least 2 frames");
  check_pose(*skeleton, start, "start pose");
  check_pose(*skeleton, target, "target pose");
  const std::size_t joints = start.rotations.size();
  std::vector<Eigen::Quaterniond> qa(joints), qb(joints);
  for (std::size_t j = 0; j < joints; ++j) {
    qa[j] = kin::to_quaternion(start.rotations[j]);
    qb[j] = kin::to_quaternion(target.rotations[j]);
  }
  data::MotionClip clip;
  clip.skeleton = skeleton;
  clip.frame_rate = skeleton->frame_rate();
  clip.name = "interpolation";
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    clip.root_positions.push_back((1.0 - t) * start.root + t * target.root);
    std::vector<kin::Rotation6D> rots(joints);
    for (std::size_t j = 0; j < joints; ++j) rots[j] = kin::from_quaternion(qa[j].slerp(t, qb[j]));
    clip.rotations.push_back(std::move(rots));
  }
  return clip;
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw std::invalid_argument("latency statistics need at least one sample");
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t n = samples_ms.size();
  LatencyStats s;
  s.samples = n;
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(n);
  s.median_ms = n % 2 == 1 ? samples_ms[n / 2] : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  s.p99_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  s.max_ms = samples_ms.back();
  return s;
}

namespace {

template <typename S>
std::vector<double> time_steps(const ModelBundle& bundle, const InferenceModel<S>& model, std::size_t iterations) {
  const kin::Skeleton& sk = bundle.skeleton();
  const data::Pose rest = rest_pose(sk);
  const data::CanonicalFrame frame = frame_of(rest);
  const kin::FrameState start = data::state_from_pose(sk, rest, nullptr, sk.frame_rate(), frame);
  data::Pose ahead = rest;
  ahead.root.z() += 100.0;
  const kin::FrameState target = data::state_from_pose(sk, ahead, nullptr, sk.frame_rate(), frame);
  const auto cache = model.prepare(target);
  auto rec = model.zero_state();
  ad::Rng rng(1);
  constexpr int kLength = 30;
  constexpr std::size_t kWarmup = 2 * kLength;
  kin::FrameState cur = start;
  std::vector<double> ms;
  ms.reserve(iterations);
  for (std::size_t i = 0; i < iterations + kWarmup; ++i) {
    const int k = static_cast<int>(i % (kLength - 1)) + 1;
    if (k == 1) cur = start;
    const auto t0 = std::chrono::steady_clock::now();
    cur = model.step(cur, cache, rec, static_cast<double>(kLength - k), &rng);
    const double el = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (i >= kWarmup) ms.push_back(el);
  }
  return ms;
}

}  // namespace

LatencyStats bench_latency(const ModelBundle& bundle, std::size_t iterations, Precision precision) {
  if (iterations == 0) throw std::invalid_argument("latency benchmark needs at least one iteration");
  return latency_stats(precision == Precision::Float ? time_steps(bundle, bundle.float_model(), iterations)
                                                     : time_steps(bundle, bundle.double_model(), iterations));
}

}  // namespace tween::engine
