#include "tween/sampler/trainer.hpp"

#include "tween/data/windows.hpp"
#include "tween/util/kv_text.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace tween::sampler {
namespace {

std::string hex(double v) {
  std::ostringstream s;
  s << std::hexfloat << v;
  return s.str();
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

StateBatch pack_column(const std::vector<std::vector<FrameState>>& ex, std::size_t t) {
  std::vector<const FrameState*> rows;
  rows.reserve(ex.size());
  for (const auto& e : ex) rows.push_back(&e[t]);
  return StateBatch::pack(rows);
}

double last_frame_error(const ad::Tensor& pred, const ad::Tensor& gt) {
  double acc = 0.0;
  for (Index i = 0; i < pred.rows(); ++i) {
    for (Index k = 0; k < manifold::kPLDim / 3; ++k) {
      acc += (pred.row(i).segment<3>(3 * k) - gt.row(i).segment<3>(3 * k)).norm();
    }
  }
  return acc / static_cast<double>(pred.rows() * (manifold::kPLDim / 3));
}

}  // namespace

void SamplerTrainConfig::validate() const {
  if (batch < 1) throw std::invalid_argument("sampler batch size must be >= 1");
  if (iterations < 0) throw std::invalid_argument("sampler iteration count must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("sampler learning rate must be positive");
  if (lr_decay_iterations < 0) throw std::invalid_argument("sampler lr decay length must be >= 0");
  if (lr_decay_iterations > 0 && !(lr_end > 0.0)) throw std::invalid_argument("final sampler learning rate must be positive");
  if (min_length < 2 || max_length < min_length) throw std::invalid_argument("invalid transition length range");
  if (warmup_frames < 0) throw std::invalid_argument("warm-up frame count must be >= 0");
  if (static_cast<std::size_t>(max_length + warmup_frames) + 1 > data::kTrainWindowLength) {
    throw std::invalid_argument("transition length plus warm-up does not fit in a training window");
  }
}

std::string SamplerTrainConfig::to_text() const {
  std::ostringstream o;
  o << "batch=" << batch << "\niterations=" << iterations << "\nlr=" << hex(lr) << "\nlr_end=" << hex(lr_end)
    << "\nlr_decay_iterations=" << lr_decay_iterations << "\nmin_length=" << min_length
    << "\nmax_length=" << max_length << "\nwarmup_frames=" << warmup_frames << "\nseed=" << seed
    << "\nw_rot=" << hex(weights.rot) << "\nw_leg=" << hex(weights.leg) << "\nw_pos_rot=" << hex(weights.pos_rot)
    << "\nw_bone=" << hex(weights.bone) << "\nw_foot=" << hex(weights.foot)
    << "\nposition_scale=" << hex(weights.position_scale) << "\ncontact_threshold=" << hex(weights.contact_threshold)
    << "\n";
  return o.str();
}

SamplerTrainConfig SamplerTrainConfig::from_text(const std::string& text) {
  const auto kv = util::parse_kv(text);
  SamplerTrainConfig c;
  auto has = [&](const char* k) { return kv.count(k) != 0; };
  if (has("batch")) c.batch = std::stoi(kv.at("batch"));
  if (has("iterations")) c.iterations = std::stol(kv.at("iterations"));
  if (has("lr")) c.lr = num(kv.at("lr"));
  if (has("lr_end")) c.lr_end = num(kv.at("lr_end"));
  if (has("lr_decay_iterations")) c.lr_decay_iterations = std::stol(kv.at("lr_decay_iterations"));
  if (has("min_length")) c.min_length = std::stoi(kv.at("min_length"));
  if (has("max_length")) c.max_length = std::stoi(kv.at("max_length"));
  if (has("warmup_frames")) c.warmup_frames = std::stoi(kv.at("warmup_frames"));
  if (has("seed")) c.seed = std::stoull(kv.at("seed"));
  if (has("w_rot")) c.weights.rot = num(kv.at("w_rot"));
  if (has("w_leg")) c.weights.leg = num(kv.at("w_leg"));
  if (has("w_pos_rot")) c.weights.pos_rot = num(kv.at("w_pos_rot"));
  if (has("w_bone")) c.weights.bone = num(kv.at("w_bone"));
  if (has("w_foot")) c.weights.foot = num(kv.at("w_foot"));
  if (has("position_scale")) c.weights.position_scale = num(kv.at("position_scale"));
  if (has("contact_threshold")) c.weights.contact_threshold = num(kv.at("contact_threshold"));
  return c;
}

double SamplerTrainConfig::learning_rate(long iteration) const {
  if (lr_decay_iterations <= 0) return lr;
  const double a = std::clamp(static_cast<double>(iteration) / static_cast<double>(lr_decay_iterations), 0.0, 1.0);
  return lr + a * (lr_end - lr);
}

TransitionData::TransitionData(std::vector<data::MotionClip> clips) : clips_(std::move(clips)) {
  if (clips_.empty()) throw std::invalid_argument("sampler training needs at least one clip");
  for (std::size_t c = 0; c < clips_.size(); ++c) {
    kinematics_.push_back(data::compute_kinematics(clips_[c]));
    for (std::size_t s :
         data::window_starts(clips_[c].frame_count(), data::kTrainWindowLength, data::kWindowOverlap)) {
      windows_.push_back({c, s});
    }
  }
  if (windows_.empty()) throw std::invalid_argument("no training clip is long enough for a 50-frame window");
}

std::vector<FrameState> TransitionData::example(std::size_t w, std::size_t start, int n, int context) const {
  const Win& win = windows_.at(w);
  if (start < static_cast<std::size_t>(context) || start + static_cast<std::size_t>(n) >= data::kTrainWindowLength) {
    throw std::out_of_range("transition example does not fit in its window");
  }
  const data::MotionClip& clip = clips_[win.clip];
  const std::size_t s = win.start + start;
  return data::extract_frames(clip, kinematics_[win.clip], s - static_cast<std::size_t>(context),
                              static_cast<std::size_t>(context + n + 1), data::frame_at(clip, s));
}

std::vector<FrameState> TransitionData::all_window_frames() const {
  std::vector<FrameState> out;
  for (const Win& w : windows_) {
    auto f = data::extract_window(clips_[w.clip], kinematics_[w.clip], w.start, data::kTrainWindowLength);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

SamplerTrainer::SamplerTrainer(Sampler& sampler, const manifold::Manifold& manifold,
                               std::shared_ptr<const TransitionData> data, data::NormStats norm,
                               SamplerTrainConfig config)
    : sampler_(sampler),
      manifold_(manifold),
      data_(std::move(data)),
      norm_(norm),
      config_(config),
      optimizer_(sampler.params()),
      rng_(config.seed) {
  config_.validate();
  if (sampler_.upper_joints() != data_->skeleton().upper_count()) {
    throw std::invalid_argument("sampler upper-body size does not match the training skeleton");
  }
  if (sampler_.latent() != manifold_.config().latent) {
    throw std::invalid_argument("sampler latent size does not match the manifold");
  }
}

SamplerLogEntry SamplerTrainer::step() {
  if (finished()) throw std::logic_error("sampler training already finished");
  const int ctx = config_.warmup_frames;
  const int n = std::uniform_int_distribution<int>(config_.min_length, config_.max_length)(rng_);
  std::uniform_int_distribution<std::size_t> pick_window(0, data_->window_count() - 1);
  std::uniform_int_distribution<std::size_t> pick_start(static_cast<std::size_t>(ctx),
                                                        data::kTrainWindowLength - 1 - static_cast<std::size_t>(n));
  std::vector<std::vector<FrameState>> ex;
  for (int b = 0; b < config_.batch; ++b) {
    const std::size_t w = pick_window(rng_);
    const std::size_t s = pick_start(rng_);
    ex.push_back(data_->example(w, s, n, ctx));
  }

  SamplerLogEntry e;
  e.iteration = iteration_;
  e.length = n;
  ad::Tape tape;
  ad::Binding sbind(tape, sampler_.params());
  ad::Binding mbind(tape, manifold_.params());  // frozen
  try {
    std::vector<StateVars> warm;
    for (int j = 0; j < ctx; ++j) warm.push_back(StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(j))));
    const StateVars start = StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(ctx)));
    const StateVars target = StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(ctx + n)));
    const Rollout r = rollout(sbind, mbind, sampler_, manifold_, start, target, n, norm_,
                              data_->skeleton().frame_time(), &rng_, std::nullopt, warm);
    std::vector<StateBatch> gt;
    for (int k = 1; k < n; ++k) gt.push_back(pack_column(ex, static_cast<std::size_t>(ctx + k)));
    const SamplerLossTerms t = sampler_losses(r.frames, gt, data_->skeleton(), norm_, config_.weights);
    e.loss = t.total.value()(0, 0);
    e.rot = t.rot.value()(0, 0);
    e.leg = t.leg.value()(0, 0);
    e.pos_rot = t.pos_rot.value()(0, 0);
    e.foot = t.foot.value()(0, 0);
    e.bone = t.bone.value()(0, 0);
    e.final_error_cm = last_frame_error(r.frames.back().p_L.value(), gt.back().p_L);
    sampler_.params().zero_grad();
    tape.backward(t.total);
  } catch (const ad::NonFiniteError& err) {
    throw ad::NonFiniteError("sampler training diverged at iteration " + std::to_string(iteration_) + ": " +
                             err.what());
  }
  optimizer_.step(sampler_.params(), config_.learning_rate(iteration_));
  ++iteration_;
  return e;
}

void SamplerTrainer::run(const std::function<void(const SamplerLogEntry&)>& on_step) {
  while (!finished()) {
    const SamplerLogEntry e = step();
    if (on_step) on_step(e);
  }
}

double SamplerTrainer::final_frame_error_cm(int n) const {
  const int ctx = config_.warmup_frames;
  std::vector<std::vector<FrameState>> ex;
  for (std::size_t w = 0; w < data_->window_count(); ++w) ex.push_back(data_->example(w, static_cast<std::size_t>(ctx), n, ctx));
  ad::Tape tape;
  ad::Binding sbind(tape, std::as_const(sampler_.params()));
  ad::Binding mbind(tape, manifold_.params());
  ad::Rng rng(config_.seed ^ 0xabcdefULL);
  std::vector<StateVars> warm;
  for (int j = 0; j < ctx; ++j) warm.push_back(StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(j))));
  const StateVars start = StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(ctx)));
  const StateVars target = StateVars::constant(tape, pack_column(ex, static_cast<std::size_t>(ctx + n)));
  const Rollout r = rollout(sbind, mbind, sampler_, manifold_, start, target, n, norm_, data_->skeleton().frame_time(),
                            &rng, std::nullopt, warm);
  return last_frame_error(r.frames.back().p_L.value(), pack_column(ex, static_cast<std::size_t>(ctx + n - 1)).p_L);
}

void SamplerTrainer::save(ad::Checkpoint& ck) const {
  sampler_.save(ck, "sampler.");
  ck.put("sampler.optimizer.", optimizer_);
  std::ostringstream r;
  r << rng_;
  ck.texts["sampler.trainer"] = "iteration=" + std::to_string(iteration_) + "\n";
  ck.texts["sampler.trainer.rng"] = r.str();
  ck.texts["sampler.trainer.config"] = config_.to_text();
  norm_.put(ck, "norm.");
}

void SamplerTrainer::load(const ad::Checkpoint& ck) {
  if (!ck.has_text("sampler.trainer")) throw ad::CheckpointError("checkpoint has no sampler trainer state");
  const Sampler loaded = Sampler::load(ck, "sampler.");
  if (!(loaded.config() == sampler_.config()) || loaded.latent() != sampler_.latent() ||
      loaded.upper_joints() != sampler_.upper_joints()) {
    throw ad::CheckpointError("checkpoint sampler configuration differs");
  }
  sampler_ = loaded;
  optimizer_ = ad::Amsgrad(sampler_.params());
  ck.get("sampler.optimizer.", optimizer_);
  iteration_ = std::stol(util::parse_kv(ck.text("sampler.trainer")).at("iteration"));
  std::istringstream r(ck.text("sampler.trainer.rng"));
  r >> rng_;
}

}  // namespace tween::sampler
