#include "tween/manifold/trainer.hpp"

#include "tween/data/features.hpp"
#include "tween/data/windows.hpp"
#include "tween/manifold/losses.hpp"
#include "tween/util/kv_text.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tween::manifold {
namespace {

constexpr std::size_t kHalf = data::kTrainWindowLength / 2;

std::string hex(double v) {
  std::ostringstream s;
  s << std::hexfloat << v;
  return s.str();
}

double unhex(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

Var mean_of(const std::vector<Var>& terms) { return ad::mean(ad::concat_cols(terms)); }

}  // namespace

std::vector<Sequence> manifold_sequences(const std::vector<data::MotionClip>& clips) {
  std::vector<Sequence> out;
  for (const auto& clip : clips) {
    if (clip.frame_count() < data::kTrainWindowLength) continue;
    const auto kin = data::compute_kinematics(clip);
    for (std::size_t s : data::window_starts(clip.frame_count(), data::kTrainWindowLength, data::kWindowOverlap)) {
      out.push_back(data::extract_window(clip, kin, s, kHalf));
      out.push_back(data::extract_window(clip, kin, s + kHalf, kHalf));
    }
  }
  return out;
}

void ManifoldTrainConfig::validate() const {
  if (batch < 1) throw std::invalid_argument("manifold batch size must be >= 1");
  if (stage1_iterations < 0 || stage2_iterations < 0) throw std::invalid_argument("iteration counts must be >= 0");
  if (!(lr_start > 0.0) || lr_end < 0.0) throw std::invalid_argument("learning rates must be positive");
  if (lr_decay_iterations < 1) throw std::invalid_argument("lr_decay_iterations must be >= 1");
  if (warmup_epochs < 0.0 || scheduled_sampling_k < 0.0) throw std::invalid_argument("epoch counts must be >= 0");
  if (!(contact_threshold > 0.0)) throw std::invalid_argument("contact threshold must be positive");
}

std::string ManifoldTrainConfig::to_text() const {
  std::ostringstream o;
  o << "batch=" << batch << "\nstage1_iterations=" << stage1_iterations << "\nstage2_iterations=" << stage2_iterations
    << "\nlr_start=" << hex(lr_start) << "\nlr_end=" << hex(lr_end) << "\nlr_decay_iterations=" << lr_decay_iterations
    << "\nwarmup_epochs=" << hex(warmup_epochs) << "\nscheduled_sampling_k=" << hex(scheduled_sampling_k)
    << "\ncontact_threshold=" << hex(contact_threshold) << "\nseed=" << seed << "\n";
  return o.str();
}

ManifoldTrainConfig ManifoldTrainConfig::from_text(const std::string& text) {
  const auto kv = util::parse_kv(text);
  ManifoldTrainConfig c;
  auto has = [&](const char* k) { return kv.count(k) != 0; };
  if (has("batch")) c.batch = std::stoi(kv.at("batch"));
  if (has("stage1_iterations")) c.stage1_iterations = std::stol(kv.at("stage1_iterations"));
  if (has("stage2_iterations")) c.stage2_iterations = std::stol(kv.at("stage2_iterations"));
  if (has("lr_start")) c.lr_start = unhex(kv.at("lr_start"));
  if (has("lr_end")) c.lr_end = unhex(kv.at("lr_end"));
  if (has("lr_decay_iterations")) c.lr_decay_iterations = std::stol(kv.at("lr_decay_iterations"));
  if (has("warmup_epochs")) c.warmup_epochs = unhex(kv.at("warmup_epochs"));
  if (has("scheduled_sampling_k")) c.scheduled_sampling_k = unhex(kv.at("scheduled_sampling_k"));
  if (has("contact_threshold")) c.contact_threshold = unhex(kv.at("contact_threshold"));
  if (has("seed")) c.seed = std::stoull(kv.at("seed"));
  return c;
}

double scheduled_sampling_probability(double epoch, double k) {
  if (k <= 0.0) return 1.0;
  return std::clamp((epoch - k) / k, 0.0, 1.0);
}

double decayed_learning_rate(long iteration, const ManifoldTrainConfig& c) {
  const double a = std::clamp(static_cast<double>(iteration) / static_cast<double>(c.lr_decay_iterations), 0.0, 1.0);
  return c.lr_start + a * (c.lr_end - c.lr_start);
}

double warmup_learning_rate(double epoch, long iterations_after_warmup, const ManifoldTrainConfig& c) {
  if (epoch < c.warmup_epochs) return c.lr_start * epoch / c.warmup_epochs;
  return decayed_learning_rate(iterations_after_warmup, c);
}

ManifoldTrainer::ManifoldTrainer(Manifold& model, std::vector<Sequence> sequences,
                                 std::shared_ptr<const kin::Skeleton> skeleton, ManifoldTrainConfig config)
    : model_(model),
      sequences_(std::move(sequences)),
      skeleton_(std::move(skeleton)),
      config_(config),
      optimizer_(model.params()),
      rng_(config.seed) {
  config_.validate();
  if (sequences_.empty()) throw std::invalid_argument("manifold training needs at least one sequence");
  for (const auto& s : sequences_) {
    if (s.size() != sequences_.front().size() || s.size() < 2) {
      throw std::invalid_argument("manifold training sequences must share one length >= 2");
    }
    s.front().check_against(*skeleton_);
  }
  feet_ = foot_slots(*skeleton_);
}

std::vector<std::size_t> ManifoldTrainer::draw_batch(ad::Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, sequences_.size() - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(config_.batch));
  for (auto& p : out) p = pick(rng);
  return out;
}

ManifoldTrainer::Terms ManifoldTrainer::rollout(ad::Tape& tape, ad::Binding& bind, const std::vector<std::size_t>& picks,
                                                double p, ad::Rng& rng) const {
  const std::size_t L = sequences_.front().size();
  const double dt = skeleton_->frame_time();
  std::vector<StateBatch> gt;
  gt.reserve(L);
  for (std::size_t t = 0; t < L; ++t) {
    std::vector<const FrameState*> rows;
    for (std::size_t i : picks) rows.push_back(&sequences_[i][t]);
    gt.push_back(StateBatch::pack(rows));
  }
  const auto& bones = skeleton_->lower_bones();
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Var> pos, rot, rec, kl, foot, bone;
  StateVars pred;
  for (std::size_t t = 0; t + 1 < L; ++t) {
    const bool own = t > 0 && coin(rng) < p;
    const StateVars cur = own ? pred : StateVars::constant(tape, gt[t]);
    const StateBatch& next_gt = gt[t + 1];
    Var c = condition(cur);
    Encoding enc = model_.encode(bind, c, tape.constant(condition(next_gt)));
    Var z = model_.reparameterize(enc, rng);
    Var vh = tape.constant(next_gt.v_h);
    Decoding dec = model_.decode(bind, c, ad::scale(vh, kVelocityScale), z);
    StateVars next = Manifold::advance(cur, dec, vh, dt);

    Tensor rot_gt(next_gt.batch(), kRLDim + kRhDim);
    rot_gt << next_gt.r_L, next_gt.r_h;
    Var rot_hat = ad::concat_cols({next.r_L, next.r_h});
    pos.push_back(ad::mean(ad::square(ad::sub(next.p_L, tape.constant(next_gt.p_L)))));
    rot.push_back(ad::mean(ad::square(ad::sub(rot_hat, tape.constant(rot_gt)))));
    rec.push_back(rec_loss(next.p_L, rot_hat, next_gt.p_L, rot_gt, scales_.position_weight));
    kl.push_back(kl_loss(enc.mu, enc.logvar));
    bone.push_back(bone_loss(next.p_L, bone_lengths(next_gt.p_L, bones), bones));
    foot.push_back(foot_loss(
        next.v_L, vh,
        contact_mask(next_gt.v_L, next_gt.v_h, feet_, config_.contact_threshold, skeleton_->frame_rate()), feet_));
    pred = next;
  }
  return Terms{mean_of(pos), mean_of(rot), mean_of(rec), mean_of(kl), mean_of(foot), mean_of(bone)};
}

void ManifoldTrainer::calibrate() {
  ad::Rng calib(config_.seed ^ 0x5bd1e995ULL);
  const auto picks = draw_batch(calib);
  {
    ad::Tape tape;
    ad::Binding bind(tape, std::as_const(model_.params()));
    ad::Rng r(config_.seed);
    const Terms t = rollout(tape, bind, picks, 0.0, r);
    const double pos = t.rec_pos_mse.value()(0, 0);
    const double rot = t.rec_rot_mse.value()(0, 0);
    scales_.position_weight = pos > 0.0 && rot > 0.0 ? std::sqrt(rot / pos) : 1.0;
  }
  ad::Tape tape;
  ad::Binding bind(tape, std::as_const(model_.params()));
  ad::Rng r(config_.seed);
  const Terms t = rollout(tape, bind, picks, 0.0, r);
  auto floor = [](double v) { return std::max(v, 1e-8); };
  scales_.rec = floor(t.rec.value()(0, 0));
  scales_.kl = floor(t.kl.value()(0, 0));
  scales_.foot = floor(t.foot.value()(0, 0));
  scales_.bone = floor(t.bone.value()(0, 0));
  scales_.calibrated = true;
}

bool ManifoldTrainer::finished() const {
  return iteration_ >= config_.stage1_iterations + config_.stage2_iterations;
}

double ManifoldTrainer::epoch() const {
  const long it = stage() == 1 ? iteration_ : iteration_ - config_.stage1_iterations;
  return static_cast<double>(it) * config_.batch / static_cast<double>(sequences_.size());
}

double ManifoldTrainer::sampling_probability() const {
  return stage() == 1 ? scheduled_sampling_probability(epoch(), config_.scheduled_sampling_k) : 1.0;
}

double ManifoldTrainer::learning_rate() const {
  if (stage() == 1) return decayed_learning_rate(iteration_, config_);
  const long warm = static_cast<long>(
      std::ceil(config_.warmup_epochs * static_cast<double>(sequences_.size()) / config_.batch));
  const long after = std::max(0L, iteration_ - config_.stage1_iterations - warm);
  return warmup_learning_rate(epoch(), after, config_);
}

Var ManifoldTrainer::objective(ad::Tape& tape, ad::Binding& bind, const std::vector<std::size_t>& picks, int stage,
                               double p, ad::Rng& rng, ManifoldLogEntry* terms) const {
  if (!scales_.calibrated) throw std::logic_error("manifold objective requires calibrated loss scales");
  const Terms t = rollout(tape, bind, picks, p, rng);
  Var loss = ad::add(ad::scale(t.rec, 1.0 / scales_.rec), ad::scale(t.kl, 1.0 / scales_.kl));
  if (stage == 2) {
    loss = ad::add(loss, ad::add(ad::scale(t.foot, 1.0 / scales_.foot), ad::scale(t.bone, 1.0 / scales_.bone)));
  }
  if (terms != nullptr) {
    terms->loss = loss.value()(0, 0);
    terms->rec = t.rec.value()(0, 0);
    terms->kl = t.kl.value()(0, 0);
    terms->foot = t.foot.value()(0, 0);
    terms->bone = t.bone.value()(0, 0);
  }
  return loss;
}

ManifoldLogEntry ManifoldTrainer::step() {
  if (finished()) throw std::logic_error("manifold training already finished");
  if (!scales_.calibrated) calibrate();
  ManifoldLogEntry e;
  e.iteration = iteration_;
  e.stage = stage();
  e.sampling_p = sampling_probability();
  e.lr = learning_rate();
  const auto picks = draw_batch(rng_);
  ad::Tape tape;
  ad::Binding bind(tape, model_.params());
  try {
    Var loss = objective(tape, bind, picks, e.stage, e.sampling_p, rng_, &e);
    model_.params().zero_grad();
    tape.backward(loss);
  } catch (const ad::NonFiniteError& err) {
    throw ad::NonFiniteError("manifold training diverged at iteration " + std::to_string(iteration_) + " (stage " +
                             std::to_string(e.stage) + "): " + err.what());
  }
  optimizer_.step(model_.params(), e.lr);
  ++iteration_;
  return e;
}

void ManifoldTrainer::run(const std::function<void(const ManifoldLogEntry&)>& on_step) {
  while (!finished()) {
    const ManifoldLogEntry e = step();
    if (on_step) on_step(e);
  }
}

double ManifoldTrainer::reconstruction_error_cm() const {
  std::vector<const FrameState*> cur_rows;
  std::vector<const FrameState*> next_rows;
  for (const auto& s : sequences_) {
    for (std::size_t t = 0; t + 1 < s.size(); ++t) {
      cur_rows.push_back(&s[t]);
      next_rows.push_back(&s[t + 1]);
    }
  }
  const StateBatch cur = StateBatch::pack(cur_rows);
  const StateBatch nxt = StateBatch::pack(next_rows);
  ad::Tape tape;
  ad::Binding bind(tape, std::as_const(model_.params()));
  const StateVars cv = StateVars::constant(tape, cur);
  Var c = condition(cv);
  Encoding enc = model_.encode(bind, c, tape.constant(condition(nxt)));
  Var vh = tape.constant(nxt.v_h);
  Decoding dec = model_.decode(bind, c, ad::scale(vh, kVelocityScale), enc.mu);
  const Tensor p = Manifold::advance(cv, dec, vh, skeleton_->frame_time()).p_L.value();
  double acc = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index k = 0; k < kPLDim / 3; ++k) acc += (p.row(i).segment<3>(3 * k) - nxt.p_L.row(i).segment<3>(3 * k)).norm();
  }
  return acc / static_cast<double>(p.rows() * (kPLDim / 3));
}

void ManifoldTrainer::save(ad::Checkpoint& ck) const {
  model_.save(ck, "manifold.");
  ck.put("manifold.optimizer.", optimizer_);
  std::ostringstream o;
  o << "iteration=" << iteration_ << "\nposition_weight=" << hex(scales_.position_weight)
    << "\nscale_rec=" << hex(scales_.rec) << "\nscale_kl=" << hex(scales_.kl) << "\nscale_foot=" << hex(scales_.foot)
    << "\nscale_bone=" << hex(scales_.bone) << "\ncalibrated=" << (scales_.calibrated ? 1 : 0) << "\n";
  ck.texts["manifold.trainer"] = o.str();
  std::ostringstream r;
  r << rng_;
  ck.texts["manifold.trainer.rng"] = r.str();
  ck.texts["manifold.trainer.config"] = config_.to_text();
}

void ManifoldTrainer::load(const ad::Checkpoint& ck) {
  if (!ck.has_text("manifold.trainer")) throw ad::CheckpointError("checkpoint has no manifold trainer state");
  const Manifold loaded = Manifold::load(ck, "manifold.");
  if (!(loaded.config() == model_.config())) throw ad::CheckpointError("checkpoint manifold configuration differs");
  model_ = loaded;
  optimizer_ = ad::Amsgrad(model_.params());
  ck.get("manifold.optimizer.", optimizer_);
  const auto kv = util::parse_kv(ck.text("manifold.trainer"));
  iteration_ = std::stol(kv.at("iteration"));
  scales_.position_weight = unhex(kv.at("position_weight"));
  scales_.rec = unhex(kv.at("scale_rec"));
  scales_.kl = unhex(kv.at("scale_kl"));
  scales_.foot = unhex(kv.at("scale_foot"));
  scales_.bone = unhex(kv.at("scale_bone"));
  scales_.calibrated = kv.at("calibrated") == "1";
  std::istringstream r(ck.text("manifold.trainer.rng"));
  r >> rng_;
}

}  // namespace tween::manifold
