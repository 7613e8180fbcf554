#pragma once

#include "tween/data/norm_stats.hpp"
#include "tween/manifold/model.hpp"
#include "tween/sampler/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace tween::engine {

using kin::FrameState;

/// Forward-only copy of the trained networks in scalar type S. With S = double
/// it reproduces the autodiff rollout; S = float is the inference precision.
template <typename S>
class InferenceModel {
 public:
  using Index = Eigen::Index;
  using Row = Eigen::Matrix<S, 1, Eigen::Dynamic>;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Dense {
    Mat w;  // in x out
    Row b;
    Row operator()(const Row& x) const { return x * w + b; }
  };

  struct Net {
    std::vector<Dense> layers;
    ad::Activation hidden = ad::Activation::Elu;
    ad::Activation out = ad::Activation::Identity;

    Row operator()(Row x) const {
      for (std::size_t k = 0; k + 1 < layers.size(); ++k) x = activate(hidden, layers[k](x));
      return activate(out, layers.back()(x));
    }
  };

  struct Recurrent {
    Row h;
    Row c;
  };

  /// Per-transition cache: the target encoding does not depend on the
  /// current frame.
  struct TargetCache {
    Row encoded;  // target encoder output before the time embedding
    Row p_L;
  };

  InferenceModel() = default;
  InferenceModel(const manifold::Manifold& manifold, const sampler::Sampler& sampler, const data::NormStats& norm)
      : latent_(manifold.config().latent), upper_(sampler.upper_joints()), config_(sampler.config()) {
    const auto& mp = manifold.params();
    const auto& sp = sampler.params();
    gating_ = net(mp, manifold.gating());
    for (const auto& e : manifold.experts()) {
      std::vector<Dense> layers;
      for (const auto& l : e) layers.push_back(dense(mp, l));
      experts_.push_back(std::move(layers));
    }
    state_enc_ = net(sp, sampler.state_encoder());
    target_enc_ = net(sp, sampler.target_encoder());
    offset_enc_ = net(sp, sampler.offset_encoder());
    decoder_ = net(sp, sampler.decoder());
    wx_ = sp[sampler.lstm().wx_index()].value.template cast<S>();
    wh_ = sp[sampler.lstm().wh_index()].value.template cast<S>();
    lb_ = sp[sampler.lstm().bias_index()].value.template cast<S>();
    hidden_ = sampler.lstm().hidden();
    inv_std_.resize(manifold::kPLDim);
    for (Index d = 0; d < manifold::kPLDim; ++d) inv_std_(d) = static_cast<S>(1.0 / norm.std[static_cast<std::size_t>(d)]);
  }

  Recurrent zero_state() const { return Recurrent{Row::Zero(hidden_), Row::Zero(hidden_)}; }

  TargetCache prepare(const FrameState& target) const {
    return TargetCache{target_enc_(encoder_input(target)), p_L_row(target)};
  }

  /// One synthesized frame: sampler step, manifold decode and assembly.
  FrameState step(const FrameState& cur, const TargetCache& target, Recurrent& rec, double dt, ad::Rng* rng) const {
    const Index d = config_.encoder_out;
    const Row te = sampler::time_embedding(dt, d).row(0).template cast<S>();
    Row h_state = state_enc_(encoder_input(cur)) + te;
    Row h_target = target.encoded + te;
    Row h_offset = offset_enc_((target.p_L - p_L_row(cur)).cwiseProduct(inv_std_)) + te;

    const double lambda = sampler::noise_amplitude(dt, config_.t_zero, config_.t_period);
    if (rng != nullptr && lambda > 0.0 && config_.noise_variance > 0.0) {
      std::normal_distribution<double> n(0.0, std::sqrt(config_.noise_variance));
      auto add_noise = [&](Row& r) {
        for (Index k = 0; k < d; ++k) r(k) += static_cast<S>(lambda * n(*rng));
      };
      add_noise(h_target);
      add_noise(h_offset);
      if (config_.noise_on_state) add_noise(h_state);
    }

    Row x(3 * d);
    x << h_state, h_offset, h_target;
    lstm(x, rec);
    const Row y = decoder_(rec.h);
    Row z = y.head(latent_).array().tanh() * static_cast<S>(config_.z_scale);
    const Row vh_ms = y.segment(latent_, manifold::kVhDim);
    const Row dr_U = y.segment(latent_ + manifold::kVhDim, 6 * upper_);

    const Row out = decode(condition(cur), vh_ms, z);
    return assemble(cur, out, vh_ms, dr_U);
  }

  /// Mixture-of-experts decoder output (72) for a 75-wide condition.
  Row decode(const Row& c, const Row& vh_ms, const Row& z) const {
    Row gin(c.size() + vh_ms.size() + z.size());
    gin << c, vh_ms, z;
    const Row gate = gating_(gin);
    Row blended = Row::Zero(manifold::kDecoderOutputDim);
    for (std::size_t e = 0; e < experts_.size(); ++e) {
      Row h = c;
      const auto& layers = experts_[e];
      for (std::size_t l = 0; l < layers.size(); ++l) {
        Row in(h.size() + z.size() + vh_ms.size());
        in << h, z, vh_ms;
        h = layers[l](in);
        if (l + 1 < layers.size()) h = activate(ad::Activation::Elu, h);
      }
      blended += gate(static_cast<Index>(e)) * h;
    }
    return blended;
  }

  Index latent() const { return latent_; }
  Index hidden() const { return hidden_; }

 private:
  static Row activate(ad::Activation a, Row x) {
    switch (a) {
      case ad::Activation::Identity:
        return x;
      case ad::Activation::Elu:
        return x.unaryExpr([](S v) { return v > S(0) ? v : std::expm1(v); });
      case ad::Activation::Plu:
        return x.unaryExpr([](S v) {
          const S a = static_cast<S>(ad::kPluAlpha);
          const S c = static_cast<S>(ad::kPluC);
          return std::max(a * (v + c) - c, std::min(a * (v - c) + c, v));
        });
      case ad::Activation::Tanh:
        return x.array().tanh();
      case ad::Activation::Sigmoid:
        return x.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
      case ad::Activation::Softmax: {
        const S m = x.maxCoeff();
        Row e = (x.array() - m).exp();
        return e / e.sum();
      }
    }
    return x;
  }

  static Dense dense(const ad::ParameterSet& p, const ad::Linear& l) {
    return Dense{p[l.weight_index()].value.template cast<S>(), p[l.bias_index()].value.template cast<S>()};
  }

  static Net net(const ad::ParameterSet& p, const ad::Mlp& m) {
    Net n;
    for (const auto& l : m.layers()) n.layers.push_back(dense(p, l));
    n.hidden = m.hidden_activation();
    n.out = m.output_activation();
    return n;
  }

  static Row vec3(const kin::Vec3& v) {
    Row r(3);
    r << static_cast<S>(v.x()), static_cast<S>(v.y()), static_cast<S>(v.z());
    return r;
  }

  static void put6(Row& r, Index at, const kin::Rotation6D& q) {
    const auto a = q.to_array();
    for (int k = 0; k < 6; ++k) r(at + k) = static_cast<S>(a[static_cast<std::size_t>(k)]);
  }

  static Row p_L_row(const FrameState& s) {
    Row r(manifold::kPLDim);
    for (std::size_t k = 0; k < s.p_L.size(); ++k) r.segment(3 * static_cast<Index>(k), 3) = vec3(s.p_L[k]);
    return r;
  }

  Row encoder_input(const FrameState& s) const {
    const S scale = static_cast<S>(manifold::kVelocityScale);
    Row r(manifold::kVhDim + manifold::kVLDim + 6 * upper_);
    r.head(3) = vec3(s.v_h) * scale;
    for (std::size_t k = 0; k < s.v_L.size(); ++k) r.segment(3 + 3 * static_cast<Index>(k), 3) = vec3(s.v_L[k]) * scale;
    for (std::size_t k = 0; k < s.r_U.size(); ++k) put6(r, 21 + 6 * static_cast<Index>(k), s.r_U[k]);
    return r;
  }

  static Row condition(const FrameState& s) {
    const S scale = static_cast<S>(manifold::kVelocityScale);
    Row c(manifold::kConditionDim);
    c.head(3) = vec3(s.v_h) * scale;
    for (std::size_t k = 0; k < s.v_L.size(); ++k) c.segment(3 + 3 * static_cast<Index>(k), 3) = vec3(s.v_L[k]) * scale;
    put6(c, 21, s.r_h);
    for (std::size_t k = 0; k < s.r_L.size(); ++k) put6(c, 27 + 6 * static_cast<Index>(k), s.r_L[k]);
    return c;
  }

  void lstm(const Row& x, Recurrent& rec) const {
    const Row g = x * wx_ + rec.h * wh_ + lb_;
    const Index H = hidden_;
    for (Index k = 0; k < H; ++k) {
      const S i = S(1) / (S(1) + std::exp(-g(k)));
      const S f = S(1) / (S(1) + std::exp(-g(H + k)));
      const S gg = std::tanh(g(2 * H + k));
      const S o = S(1) / (S(1) + std::exp(-g(3 * H + k)));
      rec.c(k) = f * rec.c(k) + i * gg;
      rec.h(k) = o * std::tanh(rec.c(k));
    }
  }

  FrameState assemble(const FrameState& cur, const Row& out, const Row& vh_ms, const Row& dr_U) const {
    const double inv = 1.0 / manifold::kVelocityScale;
    FrameState n;
    n.v_h = kin::Vec3(vh_ms(0), vh_ms(1), vh_ms(2)) * inv;
    for (std::size_t k = 0; k < n.v_L.size(); ++k) {
      const Index o = 3 * static_cast<Index>(k);
      n.v_L[k] = kin::Vec3(out(o), out(o + 1), out(o + 2)) * inv;
    }
    auto plus = [](const kin::Rotation6D& r, const Row& src, Index at) {
      std::array<double, 6> d;
      for (int q = 0; q < 6; ++q) d[static_cast<std::size_t>(q)] = static_cast<double>(src(at + q));
      return kin::add_rotation_delta(r, d);
    };
    for (std::size_t k = 0; k < n.r_L.size(); ++k) {
      n.r_L[k] = plus(cur.r_L[k], out, manifold::kVLDim + 6 * static_cast<Index>(k));
    }
    n.r_h = plus(cur.r_h, out, manifold::kVLDim + manifold::kRLDim);
    n.r_U.resize(cur.r_U.size());
    for (std::size_t k = 0; k < n.r_U.size(); ++k) n.r_U[k] = plus(cur.r_U[k], dr_U, 6 * static_cast<Index>(k));
    const double dt = frame_time_;
    for (std::size_t k = 0; k < n.p_L.size(); ++k) n.p_L[k] = cur.p_L[k] + (n.v_L[k] + n.v_h) * dt;
    n.p_h = cur.p_h + n.v_h * dt;
    return n;
  }

 public:
  void set_frame_time(double t) { frame_time_ = t; }

 private:
  Index latent_ = 0;
  Index upper_ = 0;
  Index hidden_ = 0;
  sampler::SamplerConfig config_;
  double frame_time_ = 1.0 / 30.0;
  Net gating_;
  std::vector<std::vector<Dense>> experts_;
  Net state_enc_;
  Net target_enc_;
  Net offset_enc_;
  Net decoder_;
  Mat wx_;
  Mat wh_;
  Row lb_;
  Row inv_std_;
};

}  // namespace tween::engine
