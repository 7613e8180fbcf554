#include "doctest.h"

#include "oracles.hpp"

#include "tween/data/procedural.hpp"
#include "tween/metrics/metrics.hpp"

#include <cmath>
#include <random>

using namespace tween;
using namespace tween::metrics;

TEST_CASE("skate factor pins") {
  CHECK(std::abs(skate_factor(0.0) - 1.0) < 1e-9);
  CHECK(std::abs(skate_factor(kSkateHeight)) < 1e-9);
  CHECK(std::abs(skate_factor(kSkateHeight / 2) - (2.0 - std::sqrt(2.0))) < 1e-9);
  CHECK(skate_factor(-1.0) == 1.0);
  CHECK(skate_factor(10.0) == 0.0);
}

TEST_CASE("foot skate") {
  const std::vector<int> feet{0, 1};
  PositionSeq still(10, {Vec3(0, 0, 0), Vec3(5, 0.5, 5)});
  CHECK(foot_skate(still, feet) == 0.0);

  // One foot slides 3 cm/frame in x and 4 in z on the ground, the other is high.
  PositionSeq slide;
  for (int f = 0; f < 5; ++f) slide.push_back({Vec3(3.0 * f, 0, 4.0 * f), Vec3(3.0 * f, 10.0, 0)});
  CHECK(foot_skate(slide, feet) == doctest::Approx(5.0 / 2.0));
  // Vertical motion alone does not count.
  PositionSeq lift;
  for (int f = 0; f < 5; ++f) lift.push_back({Vec3(0, 0.1 * f, 0), Vec3(0, 0, 0)});
  CHECK(foot_skate(lift, feet) == 0.0);
  CHECK_THROWS_AS(foot_skate(slide, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("l2 global") {
  PositionSeq a{{Vec3(0, 0, 0), Vec3(1, 1, 1)}};
  PositionSeq b{{Vec3(3, 4, 0), Vec3(1, 1, 1)}};
  CHECK(l2_global(a, b) == doctest::Approx(2.5));
  CHECK(l2_global(a, a) == 0.0);
  PositionSeq c{{Vec3(0, 0, 0)}};
  CHECK_THROWS_AS(l2_global(a, c), std::invalid_argument);
}

TEST_CASE("npss matches a brute-force oracle") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const std::size_t T = 2 + i % 9;
    const auto p = testing::random_sequence(T, 5, rng);
    const auto g = testing::random_sequence(T, 5, rng);
    CHECK(std::abs(npss(p, g) - testing::npss_oracle(p, g)) < 1e-9);
    CHECK(npss(g, g) == 0.0);
  }
}

TEST_CASE("npss edge cases") {
  // Constant signals have only DC power, so any two constants match.
  const FeatureSeq c1(8, {1.0}), c2(8, {-4.0}), zero(8, {0.0});
  CHECK(npss(c1, c2) == 0.0);
  CHECK(npss(zero, c1) == 0.0);
  // Alternating signal puts all power in the Nyquist bin, one full unit of
  // mass moved across four bins.
  FeatureSeq alt;
  for (int t = 0; t < 8; ++t) alt.push_back({t % 2 == 0 ? 1.0 : -1.0});
  CHECK(npss(alt, c1) == doctest::Approx(4.0));
  CHECK(npss(c1, alt) == doctest::Approx(4.0));
  CHECK_THROWS_AS(npss(c1, FeatureSeq(7, {1.0})), std::invalid_argument);
}

TEST_CASE("power spectrum matches the direct DFT") {
  std::mt19937_64 rng(5);
  const auto s = testing::random_sequence(9, 3, rng);
  const auto ps = power_spectra(s);
  for (std::size_t d = 0; d < 3; ++d) {
    std::vector<double> col;
    for (const auto& r : s) col.push_back(r[d]);
    const auto oracle = testing::dft_power(col);
    REQUIRE(ps[d].size() == oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) CHECK(ps[d][k] == doctest::Approx(oracle[k]).epsilon(1e-12));
  }
}

TEST_CASE("bone length error") {
  const auto sk = std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like());
  const auto clip = data::generate_walk(sk, 40, data::random_gait(2));
  CHECK(bone_length_error(clip) < 1e-9);
  auto pos = clip.world_positions();
  const int leaf = sk->joint_count() - 1;
  pos[0][leaf] += (pos[0][leaf] - pos[0][sk->parent(leaf)]).normalized() * 2.1;
  const double expected = 2.1 / (40.0 * (sk->joint_count() - 1));
  CHECK(bone_length_error(pos, *sk) == doctest::Approx(expected));
}

TEST_CASE("rotation features are canonical 6D") {
  const auto sk = std::make_shared<const kin::Skeleton>(kin::Skeleton::lafan_like());
  const auto clip = data::generate_walk(sk, 10, data::random_gait(3));
  const auto f = rotation_features(clip);
  CHECK(f.size() == 10);
  CHECK(f[0].size() == static_cast<std::size_t>(6 * sk->joint_count()));
  CHECK(std::abs(Vec3(f[3][0], f[3][1], f[3][2]).norm() - 1.0) < 1e-12);
}
