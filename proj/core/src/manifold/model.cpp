#include "tween/manifold/model.hpp"

#include "tween/util/kv_text.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

namespace tween::manifold {

void ManifoldConfig::validate() const {
  if (latent < 1) throw std::invalid_argument("manifold latent dimension must be >= 1");
  if (experts < 1) throw std::invalid_argument("manifold expert count must be >= 1");
  if (expert_layers < 1) throw std::invalid_argument("manifold experts need at least one layer");
  if (expert_hidden < 1) throw std::invalid_argument("manifold expert width must be >= 1");
  for (Index w : encoder_hidden) {
    if (w < 1) throw std::invalid_argument("manifold encoder widths must be >= 1");
  }
  for (Index w : gating_hidden) {
    if (w < 1) throw std::invalid_argument("manifold gating widths must be >= 1");
  }
}

std::string ManifoldConfig::to_text() const {
  std::ostringstream out;
  out << "latent=" << latent << "\nexperts=" << experts << "\nencoder_hidden="
      << util::join_list({encoder_hidden.begin(), encoder_hidden.end()})
      << "\ngating_hidden=" << util::join_list({gating_hidden.begin(), gating_hidden.end()})
      << "\nexpert_hidden=" << expert_hidden << "\nexpert_layers=" << expert_layers << "\n";
  return out.str();
}

ManifoldConfig ManifoldConfig::from_text(const std::string& text) {
  const auto kv = util::parse_kv(text);
  ManifoldConfig c;
  auto get = [&](const char* k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("latent")) c.latent = std::stol(*v);
  if (auto v = get("experts")) c.experts = std::stoi(*v);
  if (auto v = get("encoder_hidden")) {
    auto l = util::split_list(*v);
    c.encoder_hidden.assign(l.begin(), l.end());
  }
  if (auto v = get("gating_hidden")) {
    auto l = util::split_list(*v);
    c.gating_hidden.assign(l.begin(), l.end());
  }
  if (auto v = get("expert_hidden")) c.expert_hidden = std::stol(*v);
  if (auto v = get("expert_layers")) c.expert_layers = std::stoi(*v);
  c.validate();
  return c;
}

Manifold::Manifold(const ManifoldConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  ad::Rng rng(seed);
  const Index latent = config_.latent;
  encoder_ = ad::Mlp(params_, "manifold.encoder", 2 * kConditionDim, config_.encoder_hidden, 2 * latent,
                     ad::Activation::Elu, ad::Activation::Identity, rng);
  const Index decoder_in = kConditionDim + kVhDim + latent;
  gating_ = ad::Mlp(params_, "manifold.gating", decoder_in, config_.gating_hidden, config_.experts,
                    ad::Activation::Elu, ad::Activation::Softmax, rng);
  for (int e = 0; e < config_.experts; ++e) {
    std::vector<ad::Linear> layers;
    for (int l = 0; l < config_.expert_layers; ++l) {
      const Index in = (l == 0 ? kConditionDim : config_.expert_hidden) + latent + kVhDim;
      const Index out = l + 1 == config_.expert_layers ? kDecoderOutputDim : config_.expert_hidden;
      layers.emplace_back(params_, "manifold.expert" + std::to_string(e) + ".l" + std::to_string(l), in, out, rng);
    }
    experts_.push_back(std::move(layers));
  }
}

Encoding Manifold::encode(ad::Binding& bind, Var c, Var c_next) const {
  if (c.cols() != kConditionDim || c_next.cols() != kConditionDim) {
    throw ad::ShapeError("manifold encoder expects two 75-wide conditions");
  }
  Var out = encoder_(bind, ad::concat_cols({c, c_next}));
  return Encoding{ad::slice_cols(out, 0, config_.latent), ad::slice_cols(out, config_.latent, config_.latent)};
}

Var Manifold::reparameterize(const Encoding& e, ad::Rng& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor eps(e.mu.rows(), e.mu.cols());
  for (Index k = 0; k < eps.size(); ++k) eps.data()[k] = n(rng);
  return reparameterize(e, eps);
}

Var Manifold::reparameterize(const Encoding& e, const Tensor& eps) const {
  Var noise = e.mu.tape->constant(eps);
  return ad::add(e.mu, ad::mul(ad::exp(ad::scale(e.logvar, 0.5)), noise));
}

Decoding Manifold::decode(ad::Binding& bind, Var c, Var vh_next, Var z) const {
  if (c.cols() != kConditionDim || vh_next.cols() != kVhDim || z.cols() != config_.latent) {
    throw ad::ShapeError("manifold decoder input shapes do not match the configuration");
  }
  Decoding d;
  d.gate = gating_(bind, ad::concat_cols({c, vh_next, z}));
  Var blended;
  for (int e = 0; e < config_.experts; ++e) {
    Var h = c;
    const auto& layers = experts_[e];
    for (std::size_t l = 0; l < layers.size(); ++l) {
      h = layers[l](bind, ad::concat_cols({h, z, vh_next}));
      if (l + 1 < layers.size()) h = ad::elu(h);
    }
    d.experts.push_back(h);
    Var weighted = ad::mul_col(h, ad::slice_cols(d.gate, e, 1));
    blended = e == 0 ? weighted : ad::add(blended, weighted);
  }
  d.output = blended;
  return d;
}

StateVars Manifold::advance(const StateVars& cur, const Decoding& d, Var vh_next_cm, double dt) {
  StateVars n;
  n.v_h = vh_next_cm;
  n.v_L = ad::scale(ad::slice_cols(d.output, 0, kVLDim), 1.0 / kVelocityScale);
  n.r_L = ad::add(cur.r_L, ad::slice_cols(d.output, kVLDim, kRLDim));
  n.r_h = ad::add(cur.r_h, ad::slice_cols(d.output, kVLDim + kRLDim, kRhDim));
  n.r_U = cur.r_U;
  const int slots = static_cast<int>(kVLDim / 3);
  n.p_L = ad::add(cur.p_L, ad::scale(ad::add(n.v_L, tile3(vh_next_cm, slots)), dt));
  n.p_h = ad::add(cur.p_h, ad::scale(vh_next_cm, dt));
  return n;
}

void Manifold::save(ad::Checkpoint& ck, const std::string& prefix) const {
  ck.texts[prefix + "config"] = config_.to_text();
  ck.put(prefix + "params.", params_);
}

Manifold Manifold::load(const ad::Checkpoint& ck, const std::string& prefix) {
  if (!ck.has_text(prefix + "config")) throw ad::CheckpointError("checkpoint has no manifold section");
  Manifold m(ManifoldConfig::from_text(ck.text(prefix + "config")), 0);
  ck.get(prefix + "params.", m.params_);
  return m;
}

}  // namespace tween::manifold
