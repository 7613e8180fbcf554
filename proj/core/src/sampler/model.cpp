#include "tween/sampler/model.hpp"

#include "tween/util/kv_text.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tween::sampler {
namespace {

std::string hex(double v) {
  std::ostringstream s;
  s << std::hexfloat << v;
  return s.str();
}

}  // namespace

void SamplerConfig::validate() const {
  if (encoder_hidden < 1 || encoder_out < 1 || lstm_hidden < 1) {
    throw std::invalid_argument("sampler widths must be >= 1");
  }
  for (Index w : decoder_hidden) {
    if (w < 1) throw std::invalid_argument("sampler decoder widths must be >= 1");
  }
  if (!(t_period > t_zero) || t_zero < 0.0) throw std::invalid_argument("sampler needs t_period > t_zero >= 0");
  if (noise_variance < 0.0) throw std::invalid_argument("sampler noise variance must be >= 0");
  if (!(z_scale > 0.0)) throw std::invalid_argument("sampler z scale must be positive");
}

std::string SamplerConfig::to_text() const {
  std::ostringstream o;
  o << "encoder_hidden=" << encoder_hidden << "\nencoder_out=" << encoder_out << "\nlstm_hidden=" << lstm_hidden
    << "\ndecoder_hidden=" << util::join_list({decoder_hidden.begin(), decoder_hidden.end()})
    << "\nt_zero=" << hex(t_zero) << "\nt_period=" << hex(t_period) << "\nnoise_variance=" << hex(noise_variance)
    << "\nz_scale=" << hex(z_scale) << "\nnoise_on_state=" << (noise_on_state ? 1 : 0) << "\n";
  return o.str();
}

SamplerConfig SamplerConfig::from_text(const std::string& text) {
  const auto kv = util::parse_kv(text);
  SamplerConfig c;
  auto has = [&](const char* k) { return kv.count(k) != 0; };
  auto num = [&](const char* k) { return std::strtod(kv.at(k).c_str(), nullptr); };
  if (has("encoder_hidden")) c.encoder_hidden = std::stol(kv.at("encoder_hidden"));
  if (has("encoder_out")) c.encoder_out = std::stol(kv.at("encoder_out"));
  if (has("lstm_hidden")) c.lstm_hidden = std::stol(kv.at("lstm_hidden"));
  if (has("decoder_hidden")) {
    auto l = util::split_list(kv.at("decoder_hidden"));
    c.decoder_hidden.assign(l.begin(), l.end());
  }
  if (has("t_zero")) c.t_zero = num("t_zero");
  if (has("t_period")) c.t_period = num("t_period");
  if (has("noise_variance")) c.noise_variance = num("noise_variance");
  if (has("z_scale")) c.z_scale = num("z_scale");
  if (has("noise_on_state")) c.noise_on_state = kv.at("noise_on_state") == "1";
  c.validate();
  return c;
}

Tensor time_embedding(double dt, Index d) {
  Tensor e(1, d);
  for (Index k = 0; k < d; ++k) {
    const Index i2 = k - (k % 2);  // 2i
    const double angle = dt / std::pow(10000.0, static_cast<double>(i2) / static_cast<double>(d));
    e(0, k) = k % 2 == 0 ? std::sin(angle) : std::cos(angle);
  }
  return e;
}

double noise_amplitude(double dt, double t_zero, double t_period) {
  return std::clamp((dt - t_zero) / (t_period - t_zero), 0.0, 1.0);
}

Sampler::Sampler(const SamplerConfig& config, Index latent, int upper_joints, std::uint64_t seed)
    : config_(config), latent_(latent), upper_(upper_joints) {
  config_.validate();
  if (latent < 1 || upper_joints < 1) throw std::invalid_argument("sampler needs a latent size and upper joints");
  ad::Rng rng(seed);
  const Index enc_in = manifold::kVhDim + manifold::kVLDim + 6 * upper_joints;
  const std::vector<Index> hidden{config_.encoder_hidden};
  state_enc_ = ad::Mlp(params_, "sampler.state_encoder", enc_in, hidden, config_.encoder_out, ad::Activation::Plu,
                       ad::Activation::Plu, rng);
  target_enc_ = ad::Mlp(params_, "sampler.target_encoder", enc_in, hidden, config_.encoder_out, ad::Activation::Plu,
                        ad::Activation::Plu, rng);
  offset_enc_ = ad::Mlp(params_, "sampler.offset_encoder", manifold::kPLDim, hidden, config_.encoder_out,
                        ad::Activation::Plu, ad::Activation::Plu, rng);
  lstm_ = ad::Lstm(params_, "sampler.lstm", 3 * config_.encoder_out, config_.lstm_hidden, rng);
  decoder_ = ad::Mlp(params_, "sampler.decoder", config_.lstm_hidden, config_.decoder_hidden,
                     latent + manifold::kVhDim + 6 * upper_joints, ad::Activation::Elu, ad::Activation::Identity, rng);
}

Var encoder_input(const StateVars& s) {
  return ad::concat_cols({ad::scale(s.v_h, manifold::kVelocityScale), ad::scale(s.v_L, manifold::kVelocityScale), s.r_U});
}

Var offset_input(const StateVars& current, const StateVars& target, const data::NormStats& norm) {
  const Index B = current.p_L.rows();
  Tensor inv(B, manifold::kPLDim);
  for (Index d = 0; d < manifold::kPLDim; ++d) inv.col(d).setConstant(1.0 / norm.std[static_cast<std::size_t>(d)]);
  Var diff = ad::sub(target.p_L, current.p_L);
  return ad::mul(diff, current.p_L.tape->constant(inv));
}

StepOutput Sampler::step(ad::Binding& bind, const StateVars& current, const StateVars& target,
                         const ad::LstmState& state, double dt, const data::NormStats& norm, ad::Rng* rng) const {
  if (dt < 1.0) throw std::logic_error("sampler step with no frames remaining: the transition is complete");
  ad::Tape& tape = bind.tape();
  const Index B = current.p_L.rows();
  const Index d = config_.encoder_out;
  Var te = tape.constant(time_embedding(dt, d));

  Var h_state = ad::add_row(state_enc_(bind, encoder_input(current)), te);
  Var h_target = ad::add_row(target_enc_(bind, encoder_input(target)), te);
  Var h_offset = ad::add_row(offset_enc_(bind, offset_input(current, target, norm)), te);

  const double lambda = noise_amplitude(dt, config_.t_zero, config_.t_period);
  if (rng != nullptr && lambda > 0.0 && config_.noise_variance > 0.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(config_.noise_variance));
    auto noise = [&]() {
      Tensor t(B, d);
      for (Index k = 0; k < t.size(); ++k) t.data()[k] = lambda * n(*rng);
      return tape.constant(std::move(t));
    };
    h_target = ad::add(h_target, noise());
    h_offset = ad::add(h_offset, noise());
    if (config_.noise_on_state) h_state = ad::add(h_state, noise());
  }

  StepOutput out;
  out.state = lstm_(bind, ad::concat_cols({h_state, h_offset, h_target}), state);
  Var y = decoder_(bind, out.state.h);
  out.z = ad::scale(ad::tanh(ad::slice_cols(y, 0, latent_)), config_.z_scale);
  out.v_h = ad::scale(ad::slice_cols(y, latent_, manifold::kVhDim), 1.0 / manifold::kVelocityScale);
  out.dr_U = ad::slice_cols(y, latent_ + manifold::kVhDim, 6 * upper_);
  return out;
}

void Sampler::save(ad::Checkpoint& ck, const std::string& prefix) const {
  ck.texts[prefix + "config"] = config_.to_text();
  ck.texts[prefix + "shape"] = "latent=" + std::to_string(latent_) + "\nupper=" + std::to_string(upper_) + "\n";
  ck.put(prefix + "params.", params_);
}

Sampler Sampler::load(const ad::Checkpoint& ck, const std::string& prefix) {
  if (!ck.has_text(prefix + "config") || !ck.has_text(prefix + "shape")) {
    throw ad::CheckpointError("checkpoint has no sampler section");
  }
  const auto shape = util::parse_kv(ck.text(prefix + "shape"));
  Sampler s(SamplerConfig::from_text(ck.text(prefix + "config")), std::stol(shape.at("latent")),
            std::stoi(shape.at("upper")), 0);
  ck.get(prefix + "params.", s.params_);
  return s;
}

Rollout rollout(ad::Binding& sampler_bind, ad::Binding& manifold_bind, const Sampler& sampler,
                const manifold::Manifold& manifold, const StateVars& start, const StateVars& target, int n,
                const data::NormStats& norm, double frame_time, ad::Rng* rng, std::optional<ad::LstmState> initial,
                const std::vector<StateVars>& warmup) {
  if (n < 2) throw std::invalid_argument("transition duration must be at least 2 frames");
  if (manifold.config().latent != sampler.latent()) {
    throw std::invalid_argument("sampler latent size does not match the manifold");
  }
  ad::Tape& tape = sampler_bind.tape();
  Rollout r;
  r.state = initial ? *initial : sampler.zero_state(tape, start.p_L.rows());
  for (std::size_t j = 0; j < warmup.size(); ++j) {
    const double dt = static_cast<double>(n) + static_cast<double>(warmup.size() - j);
    r.state = sampler.step(sampler_bind, warmup[j], target, r.state, dt, norm, rng).state;
  }
  StateVars cur = start;
  for (int k = 1; k < n; ++k) {
    const StepOutput s = sampler.step(sampler_bind, cur, target, r.state, static_cast<double>(n - k), norm, rng);
    r.state = s.state;
    Var c = manifold::condition(cur);
    const manifold::Decoding dec =
        manifold.decode(manifold_bind, c, ad::scale(s.v_h, manifold::kVelocityScale), s.z);
    StateVars next = manifold::Manifold::advance(cur, dec, s.v_h, frame_time);
    next.r_U = ad::add(cur.r_U, s.dr_U);
    r.frames.push_back(next);
    cur = next;
  }
  return r;
}

}  // namespace tween::sampler
