#include "doctest.h"

#include "fixtures.hpp"
#include "gradcheck.hpp"

#include "tween/autodiff/checkpoint.hpp"
#include "tween/data/norm_stats.hpp"
#include "tween/sampler/losses.hpp"
#include "tween/sampler/model.hpp"
#include "tween/sampler/trainer.hpp"

#include <cmath>
#include <utility>

using namespace tween;
using namespace tween::sampler;
using manifold::StateBatch;

namespace {

double scalar(Var v) { return v.value()(0, 0); }

struct Setup {
  std::shared_ptr<const TransitionData> data = std::make_shared<const TransitionData>(testing::walk_clips(2, 100));
  data::NormStats norm = data::NormStats::compute(data->all_window_frames());
  manifold::Manifold manifold{testing::tiny_manifold(), 31};
  Sampler sampler{testing::tiny_sampler(), testing::tiny_manifold().latent, testing::lafan_rig()->upper_count(), 32};

  StateBatch batch(std::size_t frame, int n) const {
    std::vector<FrameState> rows;
    for (std::size_t w = 0; w < data->window_count(); ++w) rows.push_back(data->example(w, 3, n)[frame]);
    return StateBatch::pack(std::span<const FrameState>(rows));
  }

  SamplerTrainConfig train_config() const {
    SamplerTrainConfig c;
    c.batch = 3;
    c.iterations = 6;
    c.min_length = 5;
    c.max_length = 12;
    c.seed = 9;
    return c;
  }
};

}  // namespace

TEST_CASE("noise amplitude pins") {
  CHECK(noise_amplitude(5.0) == 0.0);
  CHECK(noise_amplitude(30.0) == 1.0);
  CHECK(noise_amplitude(17.5) == 0.5);
  CHECK(noise_amplitude(2.0) == 0.0);
  CHECK(noise_amplitude(100.0) == 1.0);
}

TEST_CASE("time embedding") {
  const Tensor e0 = time_embedding(0.0, 16);
  for (Index k = 0; k < 16; ++k) CHECK(e0(0, k) == (k % 2 == 0 ? 0.0 : 1.0));
  const Tensor e = time_embedding(7.0, 8);
  CHECK(e(0, 0) == doctest::Approx(std::sin(7.0)));
  CHECK(e(0, 1) == doctest::Approx(std::cos(7.0)));
  CHECK(e(0, 4) == doctest::Approx(std::sin(7.0 / std::pow(10000.0, 0.5))));
  CHECK(e(0, 5) == doctest::Approx(std::cos(7.0 / std::pow(10000.0, 0.5))));
}

TEST_CASE("sampler step output ranges and noise gating") {
  Setup s;
  const StateBatch cur = s.batch(0, 10), tgt = s.batch(10, 10);
  auto run = [&](double dt, ad::Rng* rng, double scale_params) {
    Sampler m = s.sampler;
    for (auto& p : m.params()) p.value *= scale_params;
    ad::Tape t;
    ad::Binding bind(t, std::as_const(m.params()));
    const auto h = m.zero_state(t, cur.batch());
    const StepOutput o = m.step(bind, manifold::StateVars::constant(t, cur), manifold::StateVars::constant(t, tgt), h,
                                dt, s.norm, rng);
    return std::make_pair(o.z.value(), o.v_h.value());
  };
  const auto [z_big, vh] = run(10.0, nullptr, 50.0);
  CHECK(z_big.cwiseAbs().maxCoeff() <= 4.5);
  CHECK(z_big.cwiseAbs().maxCoeff() > 4.0);
  CHECK(z_big.cols() == 6);
  ad::Rng r1(1), r2(1);
  CHECK(run(4.0, &r1, 1.0).first == run(4.0, nullptr, 1.0).first);
  CHECK(run(20.0, &r2, 1.0).first != run(20.0, nullptr, 1.0).first);
  CHECK_THROWS_AS(run(0.5, nullptr, 1.0), std::logic_error);
}

TEST_CASE("zero noise variance disables noise") {
  Setup s;
  SamplerConfig c = testing::tiny_sampler();
  c.noise_variance = 0.0;
  Sampler m(c, 6, testing::lafan_rig()->upper_count(), 32);
  const StateBatch cur = s.batch(0, 10), tgt = s.batch(10, 10);
  auto run = [&](ad::Rng* rng) {
    ad::Tape t;
    ad::Binding bind(t, std::as_const(m.params()));
    return m.step(bind, manifold::StateVars::constant(t, cur), manifold::StateVars::constant(t, tgt),
                  m.zero_state(t, cur.batch()), 25.0, s.norm, rng)
        .z.value();
  };
  ad::Rng r(3);
  CHECK(run(&r) == run(nullptr));
}

TEST_CASE("sampler losses vanish on exact predictions") {
  Setup s;
  std::vector<StateBatch> gt{s.batch(1, 8), s.batch(2, 8)};
  ad::Tape t;
  std::vector<manifold::StateVars> pred;
  for (const auto& g : gt) pred.push_back(manifold::StateVars::constant(t, g));
  const SamplerLossTerms l = sampler_losses(pred, gt, *testing::lafan_rig(), s.norm);
  CHECK(scalar(l.rot) == 0.0);
  CHECK(scalar(l.leg) == 0.0);
  CHECK(std::abs(scalar(l.pos_rot)) < 1e-12);
  CHECK(std::abs(scalar(l.bone)) < 1e-9);
  pred.pop_back();
  CHECK_THROWS_AS(sampler_losses(pred, gt, *testing::lafan_rig(), s.norm), std::invalid_argument);
}

TEST_CASE("transition data examples") {
  Setup s;
  CHECK(s.data->window_count() == 6);
  const auto ex = s.data->example(1, 10, 12, 2);
  CHECK(ex.size() == 2 + 12 + 1);
  CHECK(std::abs(ex[2].p_h.x()) < 1e-9);
  CHECK(std::abs(ex[2].p_h.z()) < 1e-9);
  CHECK_THROWS(s.data->example(1, 40, 12));
}

TEST_CASE("composed sampler loss matches central differences") {
  Setup s;
  std::mt19937_64 pick(4);
  const int n = 8;
  std::vector<StateBatch> frames;
  for (int f = 0; f <= n; ++f) frames.push_back(s.batch(static_cast<std::size_t>(f), n));
  const std::span<const StateBatch> gt(frames.data() + 1, n - 1);
  auto eval = [&](bool backward) {
    ad::Tape t;
    ad::Binding sb(t, s.sampler.params());
    ad::Binding mb(t, std::as_const(s.manifold.params()));
    ad::Rng noise(8);
    const Rollout r = rollout(sb, mb, s.sampler, s.manifold, manifold::StateVars::constant(t, frames.front()),
                              manifold::StateVars::constant(t, frames.back()), n, s.norm, 1.0 / 30.0, &noise);
    Var l = sampler_losses(r.frames, gt, *testing::lafan_rig(), s.norm).total;
    if (backward) {
      s.sampler.params().zero_grad();
      t.backward(l);
    }
    return scalar(l);
  };
  eval(true);
  std::vector<std::pair<std::size_t, Eigen::Index>> where;
  const auto coords = testing::sample_coords(s.sampler.params(), 40, pick, &where);
  std::vector<double> analytic;
  for (auto [p, k] : where) analytic.push_back(s.sampler.params()[p].grad.data()[k]);
  const auto res = testing::compare([&] { return eval(false); }, coords, analytic);
  CHECK(res.rel_error < 1e-4);
  CHECK(res.checked > 30);
}

TEST_CASE("rollout length and frozen manifold") {
  Setup s;
  const auto before = s.manifold.params();
  ad::Tape t;
  ad::Binding sb(t, s.sampler.params());
  ad::Binding mb(t, std::as_const(s.manifold.params()));
  const StateBatch a = s.batch(0, 10), b = s.batch(10, 10);
  const Rollout r = rollout(sb, mb, s.sampler, s.manifold, manifold::StateVars::constant(t, a),
                            manifold::StateVars::constant(t, b), 10, s.norm, 1.0 / 30.0, nullptr);
  CHECK(r.frames.size() == 9);
  s.sampler.params().zero_grad();
  t.backward(ad::sum(r.frames.back().p_L));
  double g = 0;
  for (const auto& p : s.sampler.params()) g += p.grad.norm();
  CHECK(g > 0.0);
  CHECK(s.manifold.params() == before);
}

TEST_CASE("sampler training is deterministic and resumes exactly") {
  auto train = [](Setup& s, long steps) {
    SamplerTrainer tr(s.sampler, s.manifold, s.data, s.norm, s.train_config());
    std::vector<SamplerLogEntry> log;
    for (long i = 0; i < steps; ++i) log.push_back(tr.step());
    return log;
  };
  Setup a, b;
  const auto la = train(a, 6), lb = train(b, 6);
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i].loss == lb[i].loss);
    CHECK(la[i].length == lb[i].length);
    CHECK(la[i].length >= 5);
    CHECK(la[i].length <= 12);
  }
  CHECK(a.sampler.params() == b.sampler.params());

  Setup c;
  ad::Checkpoint ck;
  {
    SamplerTrainer tr(c.sampler, c.manifold, c.data, c.norm, c.train_config());
    tr.step();
    tr.step();
    tr.save(ck);
  }
  Setup d;
  SamplerTrainer resumed(d.sampler, d.manifold, d.data, d.norm, d.train_config());
  resumed.load(ad::Checkpoint::deserialize(ck.serialize()));
  std::vector<SamplerLogEntry> rest;
  while (!resumed.finished()) rest.push_back(resumed.step());
  REQUIRE(rest.size() == 4);
  for (std::size_t i = 0; i < rest.size(); ++i) CHECK(rest[i].loss == la[i + 2].loss);
  CHECK(d.sampler.params() == a.sampler.params());
  CHECK(resumed.final_frame_error_cm(6) == resumed.final_frame_error_cm(6));
}

TEST_CASE("learning rate decay") {
  SamplerTrainConfig c;
  c.lr = 1e-3;
  c.lr_end = 1e-4;
  c.lr_decay_iterations = 100;
  CHECK(c.learning_rate(0) == 1e-3);
  CHECK(c.learning_rate(50) == doctest::Approx(5.5e-4).epsilon(1e-12));
  CHECK(c.learning_rate(100) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(c.learning_rate(1000) == doctest::Approx(1e-4).epsilon(1e-12));
  const auto back = SamplerTrainConfig::from_text(c.to_text());
  CHECK(back.lr_end == 1e-4);
  CHECK(back.lr_decay_iterations == 100);
  c.lr_decay_iterations = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config validation and text") {
  SamplerTrainConfig c;
  c.max_length = 60;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  SamplerTrainConfig d;
  d.lr = 0.3;
  d.weights.foot = 0.25;
  const auto back = SamplerTrainConfig::from_text(d.to_text());
  CHECK(back.lr == 0.3);
  CHECK(back.weights.foot == 0.25);
  CHECK(back.learning_rate(5000) == 0.3);
  SamplerConfig sc = testing::tiny_sampler();
  CHECK(SamplerConfig::from_text(sc.to_text()) == sc);
  sc.t_period = 1.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  Sampler m(testing::tiny_sampler(), 6, 13, 1);
  ad::Checkpoint ck;
  m.save(ck, "sampler.");
  const Sampler l = Sampler::load(ad::Checkpoint::deserialize(ck.serialize()), "sampler.");
  CHECK(l.params() == m.params());
  CHECK(l.latent() == 6);
  CHECK(l.upper_joints() == 13);
}
