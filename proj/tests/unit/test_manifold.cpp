#include "doctest.h"

#include "fixtures.hpp"
#include "gradcheck.hpp"

#include "tween/autodiff/checkpoint.hpp"
#include "tween/data/features.hpp"
#include "tween/manifold/losses.hpp"
#include "tween/manifold/state_batch.hpp"
#include "tween/manifold/trainer.hpp"

#include <cmath>
#include <utility>

using namespace tween;
using namespace tween::manifold;

namespace {

double scalar(Var v) { return v.value()(0, 0); }

StateBatch random_batch(Index rows, std::mt19937_64& rng, int upper = 13) {
  StateBatch b;
  b.p_h = testing::random_tensor(rows, 3, rng, -50, 50);
  b.r_h = testing::random_tensor(rows, 6, rng);
  b.v_h = testing::random_tensor(rows, 3, rng, -100, 100);
  b.p_L = testing::random_tensor(rows, kPLDim, rng, -50, 50);
  b.v_L = testing::random_tensor(rows, kVLDim, rng, -100, 100);
  b.r_L = testing::random_tensor(rows, kRLDim, rng);
  b.r_U = testing::random_tensor(rows, 6 * upper, rng);
  return b;
}

}  // namespace

TEST_CASE("kl pins and non-negativity") {
  ad::Tape t;
  auto kl = [&](double mu, double lv) {
    return scalar(kl_loss(t.constant(Tensor::Constant(1, 1, mu)), t.constant(Tensor::Constant(1, 1, lv))));
  };
  CHECK(kl(0.0, 0.0) == 0.0);
  CHECK(kl(1.0, 0.0) == 0.5);
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double mu = -3.0 + 0.06 * i, lv = -3.0 + 0.06 * j;
      CHECK(kl(mu, lv) >= 0.0);
    }
  }
  // Closed form for a batch: mean over all entries.
  Tensor mu(1, 2), lv(1, 2);
  mu << 1.0, 2.0;
  lv << 0.5, -1.0;
  double expected = 0.0;
  for (int k = 0; k < 2; ++k) expected += -0.5 * (1 + lv(0, k) - mu(0, k) * mu(0, k) - std::exp(lv(0, k)));
  CHECK(scalar(kl_loss(t.constant(mu), t.constant(lv))) == doctest::Approx(expected / 2));
}

TEST_CASE("reconstruction and bone losses vanish on exact predictions") {
  std::mt19937_64 rng(1);
  const kin::Skeleton& sk = *testing::lafan_rig();
  const Tensor p = testing::random_tensor(4, kPLDim, rng, -40, 40);
  const Tensor r = testing::random_tensor(4, kRLDim + kRhDim, rng);
  ad::Tape t;
  CHECK(scalar(rec_loss(t.constant(p), t.constant(r), p, r, 3.0)) == 0.0);
  const auto& bones = sk.lower_bones();
  CHECK(scalar(bone_loss(t.constant(p), bone_lengths(p, bones), bones)) == 0.0);
  // Mean of squared weighted errors over the concatenation.
  Tensor p2 = p;
  p2(0, 0) += 1.0;
  const double expect = (2.0 * 2.0) / static_cast<double>(4 * (kPLDim + kRLDim + kRhDim));
  CHECK(scalar(rec_loss(t.constant(p2), t.constant(r), p, r, 2.0)) == doctest::Approx(expect));
}

TEST_CASE("bone lengths") {
  Tensor p = Tensor::Zero(1, kPLDim);
  p(0, 3) = 3.0;
  p(0, 5) = 4.0;
  const std::vector<std::pair<int, int>> bones{{1, 0}};
  CHECK(bone_lengths(p, bones)(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("foot loss and contacts") {
  const kin::Skeleton& sk = *testing::lafan_rig();
  const auto slots = foot_slots(sk);
  REQUIRE(slots.size() == 4);
  Tensor v_L = Tensor::Zero(2, kVLDim), v_h = Tensor::Zero(2, 3);
  v_h(1, 0) = 30.0 * 5.0;  // 5 cm per frame at 30 Hz
  const Tensor c = contact_mask(v_L, v_h, slots, 0.2, 30.0);
  CHECK(c.row(0).sum() == 4.0);
  CHECK(c.row(1).sum() == 0.0);
  ad::Tape t;
  CHECK(scalar(foot_loss(t.constant(v_L), t.constant(Tensor::Zero(2, 3)), c, slots)) == 0.0);
  Tensor moving = v_L;
  moving(0, 3 * slots[0]) = 6.0;
  moving(0, 3 * slots[0] + 1) = 8.0;
  CHECK(scalar(foot_loss(t.constant(moving), t.constant(Tensor::Zero(2, 3)), c, slots)) == doctest::Approx(10.0 / 8.0));
}

TEST_CASE("mixture of experts gating and blend") {
  Manifold m(testing::tiny_manifold(), 3);
  std::mt19937_64 rng(2);
  ad::Tape t;
  ad::Binding bind(t, std::as_const(m.params()));
  const Decoding d = m.decode(bind, t.constant(testing::random_tensor(5, kConditionDim, rng)),
                              t.constant(testing::random_tensor(5, 3, rng)), t.constant(testing::random_tensor(5, 6, rng)));
  const Tensor& g = d.gate.value();
  REQUIRE(g.cols() == 3);
  for (Index r = 0; r < g.rows(); ++r) {
    CHECK(g.row(r).minCoeff() >= 0.0);
    CHECK(std::abs(g.row(r).sum() - 1.0) < 1e-9);
  }
  Tensor manual = Tensor::Zero(5, kDecoderOutputDim);
  for (int e = 0; e < 3; ++e) {
    for (Index r = 0; r < 5; ++r) manual.row(r) += g(r, e) * d.experts[e].value().row(r);
  }
  CHECK((manual - d.output.value()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one-hot gating selects a single expert") {
  for (int pick = 0; pick < 3; ++pick) {
    Manifold m(testing::tiny_manifold(), 4);
    const ad::Linear& last = m.gating().layers().back();
    m.params()[last.weight_index()].value.setZero();
    m.params()[last.bias_index()].value.setZero();
    m.params()[last.bias_index()].value(0, pick) = 1000.0;
    std::mt19937_64 rng(5);
    ad::Tape t;
    ad::Binding bind(t, std::as_const(m.params()));
    const Decoding d = m.decode(bind, t.constant(testing::random_tensor(3, kConditionDim, rng)),
                                t.constant(testing::random_tensor(3, 3, rng)), t.constant(testing::random_tensor(3, 6, rng)));
    for (Index r = 0; r < 3; ++r) CHECK(d.gate.value()(r, pick) == 1.0);
    CHECK((d.output.value() - d.experts[pick].value()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("advance integrates velocities") {
  std::mt19937_64 rng(6);
  const StateBatch cur = random_batch(2, rng);
  const Tensor out = testing::random_tensor(2, kDecoderOutputDim, rng);
  const Tensor vh = testing::random_tensor(2, 3, rng, -100, 100);
  ad::Tape t;
  Decoding d;
  d.output = t.constant(out);
  const double dt = 1.0 / 30.0;
  const StateBatch n = Manifold::advance(StateVars::constant(t, cur), d, t.constant(vh), dt).values();
  for (Index r = 0; r < 2; ++r) {
    for (int k = 0; k < 6; ++k) {
      for (int a = 0; a < 3; ++a) {
        const double vl = out(r, 3 * k + a) * 100.0;
        CHECK(n.v_L(r, 3 * k + a) == doctest::Approx(vl));
        CHECK(n.p_L(r, 3 * k + a) == doctest::Approx(cur.p_L(r, 3 * k + a) + (vl + vh(r, a)) * dt));
      }
    }
    for (int a = 0; a < 3; ++a) CHECK(n.p_h(r, a) == doctest::Approx(cur.p_h(r, a) + vh(r, a) * dt));
    for (int k = 0; k < kRLDim; ++k) CHECK(n.r_L(r, k) == doctest::Approx(cur.r_L(r, k) + out(r, kVLDim + k)));
    for (int k = 0; k < 6; ++k) CHECK(n.r_h(r, k) == doctest::Approx(cur.r_h(r, k) + out(r, kVLDim + kRLDim + k)));
  }
  CHECK(n.r_U == cur.r_U);
}

TEST_CASE("state batch pack and unpack") {
  const auto clips = testing::walk_clips(1, 30);
  const auto states = data::extract_features(clips[0]);
  const StateBatch b = StateBatch::pack(std::span<const FrameState>(states));
  CHECK(b.batch() == 30);
  const FrameState s = b.unpack(7);
  CHECK(s.p_h == states[7].p_h);
  CHECK(s.p_L == states[7].p_L);
  CHECK(s.r_U == states[7].r_U);
  const Tensor c = condition(b);
  CHECK(c.cols() == kConditionDim);
  CHECK(c(7, 0) == doctest::Approx(states[7].v_h.x() * kVelocityScale));
}

TEST_CASE("schedules") {
  CHECK(scheduled_sampling_probability(3.0, 5.0) == 0.0);
  CHECK(scheduled_sampling_probability(7.5, 5.0) == doctest::Approx(0.5));
  CHECK(scheduled_sampling_probability(20.0, 5.0) == 1.0);
  ManifoldTrainConfig c;
  c.lr_start = 1e-3;
  c.lr_end = 1e-4;
  c.lr_decay_iterations = 100;
  CHECK(decayed_learning_rate(0, c) == doctest::Approx(1e-3));
  CHECK(decayed_learning_rate(50, c) == doctest::Approx(5.5e-4));
  CHECK(decayed_learning_rate(500, c) == doctest::Approx(1e-4));
  CHECK(warmup_learning_rate(5.0, 0, c) == doctest::Approx(0.5e-3));
}

TEST_CASE("configs round trip through text") {
  const ManifoldConfig mc = testing::tiny_manifold();
  CHECK(ManifoldConfig::from_text(mc.to_text()) == mc);
  ManifoldTrainConfig tc;
  tc.lr_start = 0.1 + 0.2;
  tc.seed = 99;
  const ManifoldTrainConfig back = ManifoldTrainConfig::from_text(tc.to_text());
  CHECK(back.lr_start == tc.lr_start);
  CHECK(back.seed == 99);
  ManifoldConfig bad = mc;
  bad.experts = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ad::Checkpoint ck;
  const Manifold m(mc, 8);
  m.save(ck, "manifold.");
  const Manifold l = Manifold::load(ad::Checkpoint::deserialize(ck.serialize()), "manifold.");
  CHECK(l.params() == m.params());
  CHECK(l.config() == mc);
}

TEST_CASE("manifold sequences") {
  const auto clips = testing::walk_clips(2, 100);
  const auto seqs = manifold_sequences(clips);
  CHECK(seqs.size() == 2 * 3 * 2);
  for (const auto& s : seqs) {
    CHECK(s.size() == 25);
    CHECK(std::abs(s[0].p_h.x()) < 1e-9);
    CHECK(std::abs(s[0].p_h.z()) < 1e-9);
  }
}

namespace {

struct Fixture {
  std::vector<data::MotionClip> clips = testing::walk_clips(2, 100);
  Manifold model = testing::damped(Manifold(testing::tiny_manifold(), 21));
  ManifoldTrainConfig config() const {
    ManifoldTrainConfig c;
    c.batch = 4;
    c.stage1_iterations = 4;
    c.stage2_iterations = 3;
    c.lr_start = 1e-3;
    c.lr_decay_iterations = 7;
    c.warmup_epochs = 0.0;
    c.scheduled_sampling_k = 0.5;
    c.seed = 5;
    return c;
  }
};

std::vector<ManifoldLogEntry> train(Fixture& f, long steps) {
  ManifoldTrainer tr(f.model, manifold_sequences(f.clips), testing::lafan_rig(), f.config());
  std::vector<ManifoldLogEntry> log;
  for (long i = 0; i < steps; ++i) log.push_back(tr.step());
  return log;
}

}  // namespace

TEST_CASE("composed manifold objective matches central differences") {
  Fixture f;
  ManifoldTrainer tr(f.model, manifold_sequences(f.clips), testing::lafan_rig(), f.config());
  tr.calibrate();
  std::mt19937_64 rng(77);
  for (int stage : {1, 2}) {
    const std::vector<std::size_t> picks{0, 3, 5};
    auto eval = [&](bool backward) {
      ad::Tape t;
      ad::Binding bind(t, f.model.params());
      ad::Rng noise(123);
      Var l = tr.objective(t, bind, picks, stage, 0.5, noise);
      if (backward) {
        f.model.params().zero_grad();
        t.backward(l);
      }
      return scalar(l);
    };
    eval(true);
    std::vector<std::pair<std::size_t, Eigen::Index>> where;
    const auto coords = testing::sample_coords(f.model.params(), 30, rng, &where);
    std::vector<double> analytic;
    for (auto [p, k] : where) analytic.push_back(f.model.params()[p].grad.data()[k]);
    const auto r = testing::compare([&] { return eval(false); }, coords, analytic);
    CHECK(r.rel_error < 1e-4);
    CHECK(r.checked > 20);
  }
}

TEST_CASE("manifold training is deterministic and resumes exactly") {
  Fixture a, b;
  const auto la = train(a, 7);
  const auto lb = train(b, 7);
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i].loss == lb[i].loss);
    CHECK(la[i].rec == lb[i].rec);
  }
  CHECK(la.back().stage == 2);
  CHECK(a.model.params() == b.model.params());

  Fixture c;
  ad::Checkpoint ck;
  {
    ManifoldTrainer tr(c.model, manifold_sequences(c.clips), testing::lafan_rig(), c.config());
    for (int i = 0; i < 3; ++i) tr.step();
    tr.save(ck);
  }
  Fixture d;
  ManifoldTrainer resumed(d.model, manifold_sequences(d.clips), testing::lafan_rig(), d.config());
  resumed.load(ad::Checkpoint::deserialize(ck.serialize()));
  CHECK(resumed.iteration() == 3);
  std::vector<ManifoldLogEntry> rest;
  while (!resumed.finished()) rest.push_back(resumed.step());
  REQUIRE(rest.size() == 4);
  for (std::size_t i = 0; i < rest.size(); ++i) CHECK(rest[i].loss == la[i + 3].loss);
  CHECK(d.model.params() == a.model.params());
}

TEST_CASE("training reduces the loss") {
  Fixture f;
  ManifoldTrainConfig c = f.config();
  c.stage1_iterations = 60;
  c.stage2_iterations = 0;
  c.lr_decay_iterations = 60;
  ManifoldTrainer tr(f.model, manifold_sequences(f.clips), testing::lafan_rig(), c);
  const double before = tr.reconstruction_error_cm();
  tr.run();
  CHECK(tr.reconstruction_error_cm() < before);
}
