#include "doctest.h"

#include "gradcheck.hpp"

#include "tween/autodiff/amsgrad.hpp"
#include "tween/autodiff/checkpoint.hpp"
#include "tween/autodiff/layers.hpp"

#include <cmath>
#include <filesystem>
#include <utility>

using namespace tween;
using ad::Tensor;
using ad::Var;
using testing::check_op;
using testing::random_tensor;

namespace {

// Keeps values at least `gap` away from the given kinks.
Tensor away_from(Tensor t, std::initializer_list<double> kinks, double gap = 1e-3) {
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    for (double c : kinks) {
      if (std::abs(t.data()[k] - c) < gap) t.data()[k] = c + 2 * gap;
    }
  }
  return t;
}

}  // namespace

TEST_CASE("plu and elu scalar values") {
  CHECK(ad::plu(0.5) == doctest::Approx(0.5));
  CHECK(ad::plu(2.0) == doctest::Approx(1.1));
  CHECK(ad::plu(-2.0) == doctest::Approx(-1.1));
  CHECK(ad::plu(1.0) == doctest::Approx(1.0));
  CHECK(ad::elu(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
  CHECK(ad::elu(3.0) == 3.0);
}

TEST_CASE("every op matches central differences") {
  std::mt19937_64 rng(7);
  const std::vector<std::pair<const char*, testing::OpFn>> unary = {
      {"elu", [](ad::Tape&, const std::vector<Var>& v) { return ad::elu(v[0]); }},
      {"plu", [](ad::Tape&, const std::vector<Var>& v) { return ad::plu(v[0]); }},
      {"tanh", [](ad::Tape&, const std::vector<Var>& v) { return ad::tanh(v[0]); }},
      {"sigmoid", [](ad::Tape&, const std::vector<Var>& v) { return ad::sigmoid(v[0]); }},
      {"softmax", [](ad::Tape&, const std::vector<Var>& v) { return ad::softmax(v[0]); }},
      {"exp", [](ad::Tape&, const std::vector<Var>& v) { return ad::exp(v[0]); }},
      {"square", [](ad::Tape&, const std::vector<Var>& v) { return ad::square(v[0]); }},
      {"abs", [](ad::Tape&, const std::vector<Var>& v) { return ad::abs(v[0]); }},
      {"scale", [](ad::Tape&, const std::vector<Var>& v) { return ad::scale(v[0], -1.7); }},
      {"add_scalar", [](ad::Tape&, const std::vector<Var>& v) { return ad::add_scalar(v[0], 0.3); }},
      {"slice_cols", [](ad::Tape&, const std::vector<Var>& v) { return ad::slice_cols(v[0], 1, 4); }},
      {"sum", [](ad::Tape&, const std::vector<Var>& v) { return ad::sum(v[0]); }},
      {"mean", [](ad::Tape&, const std::vector<Var>& v) { return ad::mean(v[0]); }},
      {"norm3", [](ad::Tape&, const std::vector<Var>& v) { return ad::norm3(v[0]); }},
  };
  for (int draw = 0; draw < 10; ++draw) {
    for (const auto& [name, op] : unary) {
      CAPTURE(name);
      const Tensor x = away_from(random_tensor(3, 6, rng, -2.0, 2.0), {-1.0, 0.0, 1.0});
      const auto r = check_op(op, {x}, rng);
      CHECK(r.rel_error < 1e-4);
      CHECK(r.checked > 0);
    }
    const auto mm = check_op([](ad::Tape&, const std::vector<Var>& v) { return ad::matmul(v[0], v[1]); },
                             {random_tensor(3, 4, rng), random_tensor(4, 5, rng)}, rng);
    CHECK(mm.rel_error < 1e-4);
    const auto binary = check_op(
        [](ad::Tape&, const std::vector<Var>& v) { return ad::mul(ad::add(v[0], v[1]), ad::sub(v[0], v[1])); },
        {random_tensor(2, 5, rng), random_tensor(2, 5, rng)}, rng);
    CHECK(binary.rel_error < 1e-4);
    const auto rows = check_op(
        [](ad::Tape&, const std::vector<Var>& v) { return ad::mul_col(ad::add_row(v[0], v[1]), v[2]); },
        {random_tensor(3, 4, rng), random_tensor(1, 4, rng), random_tensor(3, 1, rng)}, rng);
    CHECK(rows.rel_error < 1e-4);
    const auto cat = check_op(
        [](ad::Tape&, const std::vector<Var>& v) { return ad::concat_cols({v[0], ad::tanh(v[1]), v[0]}); },
        {random_tensor(2, 3, rng), random_tensor(2, 2, rng)}, rng);
    CHECK(cat.rel_error < 1e-4);
    const auto lstm = check_op(
        [](ad::Tape&, const std::vector<Var>& v) {
          const ad::LstmState s = ad::lstm_cell(v[0], ad::LstmState{v[1], v[2]}, v[3], v[4], v[5]);
          return ad::concat_cols({s.h, s.c});
        },
        {random_tensor(2, 3, rng), random_tensor(2, 4, rng), random_tensor(2, 4, rng), random_tensor(3, 16, rng),
         random_tensor(4, 16, rng), random_tensor(1, 16, rng)},
        rng);
    CHECK(lstm.rel_error < 1e-4);
  }
}

TEST_CASE("softmax rows are a distribution") {
  std::mt19937_64 rng(3);
  ad::Tape t;
  const Tensor y = ad::softmax(t.constant(random_tensor(4, 6, rng, -50, 50))).value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    CHECK(y.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.row(r).minCoeff() >= 0.0);
  }
}

TEST_CASE("non-finite values and shape mismatches are rejected") {
  ad::Tape t;
  CHECK_THROWS_AS(ad::exp(t.constant(Tensor::Constant(1, 1, 1000.0))), ad::NonFiniteError);
  CHECK_THROWS_AS(ad::matmul(t.constant(Tensor::Zero(2, 3)), t.constant(Tensor::Zero(2, 3))), ad::ShapeError);
  CHECK_THROWS_AS(ad::add(t.constant(Tensor::Zero(2, 3)), t.constant(Tensor::Zero(3, 2))), ad::ShapeError);
}

TEST_CASE("frozen binding passes gradients to inputs only") {
  ad::Rng rng(1);
  ad::ParameterSet params;
  ad::Linear lin(params, "lin", 3, 2, rng);
  params.zero_grad();
  ad::Tape t;
  ad::Binding bind(t, std::as_const(params));
  Var x = t.input(Tensor::Ones(1, 3));
  Var y = ad::sum(lin(bind, x));
  t.backward(y);
  CHECK(t.grad(x).norm() > 0.0);
  for (const auto& p : params) CHECK(p.grad.norm() == 0.0);
  CHECK_FALSE(bind.trainable());
}

TEST_CASE("layer initialization") {
  ad::Rng rng(5);
  ad::ParameterSet params;
  ad::Linear lin(params, "lin", 40, 60, rng);
  const double limit = std::sqrt(6.0 / 100.0);
  CHECK(params[lin.weight_index()].value.cwiseAbs().maxCoeff() <= limit);
  CHECK(params[lin.bias_index()].value.norm() == 0.0);
  ad::Lstm lstm(params, "lstm", 5, 16, rng);
  const Tensor& b = params[lstm.bias_index()].value;
  CHECK(b.middleCols(16, 16).minCoeff() == 1.0);
  CHECK(b.middleCols(0, 16).norm() == 0.0);
  CHECK(params[lstm.wh_index()].value.cwiseAbs().maxCoeff() <= 0.25);
}

TEST_CASE("amsgrad step matches the update rule") {
  ad::ParameterSet params;
  const std::size_t i = params.add("w", 1, 2);
  params[i].value << 1.0, -1.0;
  params[i].grad = Tensor(1, 2);
  params[i].grad << 2.0, -0.5;
  ad::Amsgrad opt(params);
  opt.step(params, 0.1);
  // m = 0.5 g, v = 0.1 g^2, step = lr m / (sqrt(v) + eps)
  const double s0 = 0.1 * 1.0 / (std::sqrt(0.4) + 1e-8);
  const double s1 = 0.1 * -0.25 / (std::sqrt(0.025) + 1e-8);
  CHECK(params[i].value(0, 0) == doctest::Approx(1.0 - s0).epsilon(1e-14));
  CHECK(params[i].value(0, 1) == doctest::Approx(-1.0 - s1).epsilon(1e-14));
  // A smaller second gradient keeps the larger second-moment maximum.
  params[i].grad << 0.0, 0.0;
  const Tensor before = params[i].value;
  opt.step(params, 0.1);
  const auto& m = opt.moments()[0];
  CHECK(m.vhat(0, 0) == doctest::Approx(0.4));
  CHECK(m.v(0, 0) == doctest::Approx(0.36));
  CHECK(params[i].value(0, 0) == doctest::Approx(before(0, 0) - 0.1 * 0.5 / (std::sqrt(0.4) + 1e-8)));
  CHECK(opt.steps() == 2);
}

TEST_CASE("checkpoint round trip and corruption") {
  ad::Rng rng(2);
  ad::ParameterSet params;
  ad::Mlp mlp(params, "mlp", 4, {5}, 3, ad::Activation::Plu, ad::Activation::Identity, rng);
  ad::Checkpoint ck;
  ck.put("net.", params);
  ck.texts["note"] = "a=1\n";
  const std::string bytes = ck.serialize();
  const ad::Checkpoint back = ad::Checkpoint::deserialize(bytes);
  ad::ParameterSet copy = params;
  for (auto& p : copy) p.value.setZero();
  back.get("net.", copy);
  CHECK(copy == params);
  CHECK(back.text("note") == "a=1\n");

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(ad::Checkpoint::deserialize(bad), ad::CheckpointError);
  CHECK_THROWS_AS(ad::Checkpoint::deserialize(bytes.substr(0, bytes.size() / 2)), ad::CheckpointError);
  CHECK_THROWS_AS(back.text("missing"), ad::CheckpointError);

  const auto path = std::filesystem::temp_directory_path() / "tween_ckpt_test.bin";
  ck.save(path);
  CHECK(ad::Checkpoint::load(path).serialize() == bytes);
  std::filesystem::remove(path);
}
