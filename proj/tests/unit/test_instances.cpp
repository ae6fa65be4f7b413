#include <cmath>

#include "doctest.h"
#include "mnl/instances.hpp"

using namespace mnl;

TEST_CASE("synthetic instance: ranges and determinism") {
  const MnlInstance inst = synth_instance(5, 40, 4, 100, 1.0, RewardMode::kRandom, 99);
  const double bound = 1.0 / std::sqrt(5.0);
  CHECK(inst.w_star.size() == 5);
  CHECK(inst.w_star.cwiseAbs().maxCoeff() <= bound);
  for (std::size_t t : {1u, 2u, 50u, 100u}) {
    const RoundData r = inst.round(t);
    CHECK(r.features.items() == 40);
    CHECK(r.features.matrix().cwiseAbs().maxCoeff() <= bound);
    CHECK(r.features.matrix().rowwise().norm().maxCoeff() <= 1.0);
    CHECK(r.rewards.minCoeff() >= 0.0);
    CHECK(r.rewards.maxCoeff() <= 1.0);
    CHECK_FALSE(r.uniform_rewards);
  }
  const MnlInstance again = synth_instance(5, 40, 4, 100, 1.0, RewardMode::kRandom, 99);
  CHECK(again.w_star == inst.w_star);
  CHECK(again.round(7).features.matrix() == inst.round(7).features.matrix());
  CHECK(inst.round(7).features.matrix() != inst.round(8).features.matrix());
  CHECK(synth_instance(5, 40, 4, 100, 1.0, RewardMode::kRandom, 100).w_star != inst.w_star);

  const MnlInstance flat = synth_instance(3, 10, 2, 10, 1.0, RewardMode::kUniform, 1);
  CHECK(flat.round(1).rewards == Vector::Ones(10));
  CHECK(flat.round(1).uniform_rewards);
  CHECK_THROWS(synth_instance(3, 10, 2, 10, 1.0, RewardMode::kAdversarial, 1));
}

TEST_CASE("quarter subsets") {
  const auto s4 = quarter_subsets(4);
  CHECK(s4.size() == 4);
  CHECK(s4.front() == std::vector<std::size_t>{0});
  const auto s8 = quarter_subsets(8);
  CHECK(s8.size() == 28);
  CHECK(s8[1] == std::vector<std::size_t>{0, 2});
  const auto v = random_v_set(8, 5);
  CHECK(v.size() == 2);
  CHECK(v == random_v_set(8, 5));
}

TEST_CASE("lower-bound construction at d = 4, K = 3") {
  AdversarialSpec spec;
  spec.d = 4;
  spec.k = 3;
  spec.epsilon = 0.1;
  spec.v_set = {1};
  const MnlInstance inst = lower_bound_instance(spec);
  CHECK(inst.n_items == 12);
  CHECK(inst.w_star == (Vector(4) << 0.0, 0.1, 0.0, 0.0).finished());
  const RoundData r = inst.round(1);
  for (std::size_t i = 0; i < 12; ++i) CHECK(r.features.row(i).norm() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.uniform_rewards);
  // Copies of x_V come first among the optimal set: utility eps/2 vs 0.
  CHECK(true_optimum(inst, r).assortment == Assortment{3, 4, 5});
}

TEST_CASE("lower-bound construction at d = 8: x_U . w_V = eps |U cap V| / sqrt d") {
  AdversarialSpec spec;
  spec.d = 8;
  spec.k = 1;
  spec.epsilon = 0.02;
  spec.v_set = {2, 5};
  const MnlInstance inst = lower_bound_instance(spec);
  const auto subsets = quarter_subsets(8);
  const RoundData r = inst.round(3);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    std::size_t overlap = 0;
    for (std::size_t j : subsets[i]) overlap += (j == 2 || j == 5);
    CHECK(r.features.row(i).dot(inst.w_star) ==
          doctest::Approx(0.02 * static_cast<double>(overlap) / std::sqrt(8.0)).epsilon(1e-14));
  }
}

TEST_CASE("non-uniform construction: one rewarded item, singleton optimum") {
  for (double v0 : {1.0, 2.0}) {
    AdversarialSpec spec;
    spec.d = 4;
    spec.k = 3;
    spec.v0 = v0;
    spec.epsilon = 0.1;
    spec.v_set = {2};
    const MnlInstance inst = nonuniform_lower_bound_instance(spec);
    const std::size_t star = rewarded_item(spec);
    CHECK(star == 6);
    const RoundData r = inst.round(1);
    CHECK_FALSE(r.uniform_rewards);
    for (std::size_t i = 0; i < inst.n_items; ++i) {
      CHECK(r.rewards[static_cast<Eigen::Index>(i)] == (i == star ? 1.0 : 1.0 / (v0 + 1.0)));
    }
    CHECK(true_optimum(inst, r).assortment == Assortment{star});
  }
}

TEST_CASE("adversarial spec validation") {
  AdversarialSpec spec;
  spec.d = 4;
  spec.v_set = {0};
  CHECK_NOTHROW(spec.check());
  spec.epsilon = 0.2;  // 1/(d sqrt d) = 0.125
  CHECK_THROWS_AS(spec.check(), std::domain_error);
  spec.epsilon = 0.1;
  spec.d = 6;
  CHECK_THROWS_AS(spec.check(), std::domain_error);
  spec.d = 8;
  spec.v_set = {3, 3};
  CHECK_THROWS_AS(spec.check(), std::domain_error);
}

TEST_CASE("perturbation size") {
  CHECK(default_epsilon(4, 3, 1.0, 1000) == doctest::Approx(0.0121716123890036914).epsilon(1e-14));
  // Short horizons hit the cap.
  CHECK(default_epsilon(8, 10, 1.0, 1) < 1.0 / (8.0 * std::sqrt(8.0)));
}

TEST_CASE("kappa at zero utilities is K / (K+1)^2") {
  MnlInstance inst = synth_instance(3, 10, 4, 10, 1.0, RewardMode::kUniform, 2);
  inst.w_star.setZero();
  CHECK(kappa_star(inst, 1, Assortment{0, 1, 2, 3}) == doctest::Approx(4.0 / 25.0).epsilon(1e-15));
  CHECK(kappa_star(inst, 1, Assortment{5}) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("kappa never exceeds 1/4") {
  const MnlInstance inst = synth_instance(5, 30, 6, 50, 1.0, RewardMode::kUniform, 8);
  for (std::size_t t = 1; t <= 50; ++t) {
    const RoundData r = inst.round(t);
    CHECK(kappa_star(inst, t, true_optimum(inst, r).assortment) <= 0.25 + 1e-15);
  }
}

TEST_CASE("serialization round trip") {
  const MnlInstance a = synth_instance(4, 12, 3, 20, 0.5, RewardMode::kRandom, 31);
  const MnlInstance b = deserialize_instance(serialize_instance(a));
  CHECK(b.w_star == a.w_star);
  CHECK(b.round(4).features.matrix() == a.round(4).features.matrix());
  CHECK(b.round(4).rewards == a.round(4).rewards);

  AdversarialSpec spec;
  spec.d = 8;
  spec.k = 2;
  spec.epsilon = 0.03;
  spec.v_set = {1, 6};
  const MnlInstance c = nonuniform_lower_bound_instance(spec);
  const MnlInstance e = deserialize_instance(serialize_instance(c));
  CHECK(e.n_items == c.n_items);
  CHECK(e.round(1).rewards == c.round(1).rewards);

  std::string text = serialize_instance(a);
  text.replace(text.find("seed = 31"), 9, "seed = 32");
  CHECK_THROWS_AS(deserialize_instance(text), std::runtime_error);
}

TEST_CASE("reward mode names") {
  for (auto m : {RewardMode::kUniform, RewardMode::kRandom, RewardMode::kAdversarial}) {
    CHECK(parse_reward_mode(to_string(m)) == m);
  }
  CHECK_THROWS(parse_reward_mode("fixed"));
}
