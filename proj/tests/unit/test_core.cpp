#include "doctest.h"
#include "test_support.hpp"

#include "sdmdp/core/categorical.hpp"
#include "sdmdp/core/errors.hpp"
#include "sdmdp/core/rng.hpp"
#include "sdmdp/core/tabular_mdp.hpp"

#include <cmath>

using namespace sdmdp;

namespace {

TabularMdp single_state(double reward, int H) {
  return TabularMdp(1, 1, H, 1, 0, {reward}, {Categorical::point_mass(1, 0)});
}

TimedPolicy random_policy(const TabularMdp& m, std::uint64_t seed) {
  CounterRng rng(SeedSpec{seed, 7, 0, StreamPurpose::kTest});
  std::vector<int> a;
  for (int i = 0; i < m.horizon() * m.num_states(); ++i) {
    a.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(m.num_actions()))));
  }
  return TimedPolicy(m.horizon(), m.num_states(), std::move(a));
}

}  // namespace

TEST_CASE("categorical validation and sampling") {
  CHECK_THROWS_AS(Categorical::from_probabilities({0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(Categorical::from_probabilities({1.2, -0.2}), ValidationError);
  CHECK_NOTHROW(Categorical::from_probabilities({0.5, 0.5 + 5e-13}));
  auto c = Categorical::from_probabilities({0.2, 0.0, 0.8});
  CHECK(c.support_size() == 2);
  CHECK(c.support()[1] == 2);
  CHECK(c.sample(0.1) == 0);
  CHECK(c.sample(0.2) == 2);
  CHECK(c.sample(0.999999) == 2);
  auto n = Categorical::normalized({1.0, 3.0});
  CHECK(n[1] == doctest::Approx(0.75));

  CounterRng rng(SeedSpec{1, 2, 3, StreamPurpose::kTest});
  int hits = 0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) hits += c.sample(rng.uniform()) == 0;
  const double se = std::sqrt(0.2 * 0.8 / draws);
  CHECK(std::abs(hits / static_cast<double>(draws) - 0.2) < 4 * se);
}

TEST_CASE("counter rng streams are reproducible and distinct") {
  SeedSpec spec{42, 1, 5, StreamPurpose::kTransition};
  CounterRng a(spec), b(spec), c(spec.with_purpose(StreamPurpose::kDelay));
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x == a.at(static_cast<std::uint64_t>(i)));
  }
  CHECK(CounterRng(spec).at(0) != c.at(0));
  CHECK(CounterRng(spec).at(0) != CounterRng(spec.with_episode(6)).at(0));
  CounterRng d(spec);
  for (int i = 0; i < 1000; ++i) CHECK(d.below(7) < 7);
}

TEST_CASE("tabular mdp invariants") {
  CHECK_THROWS_AS(TabularMdp(1, 1, 2, 1, 0, {1.5}, {Categorical::point_mass(1, 0)}), ValidationError);
  CHECK_THROWS_AS(TabularMdp(2, 1, 2, 1, 0, {0.0, 0.0},
                             {Categorical::from_probabilities({0.5, 0.5}), Categorical::point_mass(2, 0)}),
                  ValidationError);
  CHECK_THROWS_AS(TabularMdp(2, 1, 2, 2, 2, {0.0, 0.0},
                             {Categorical::point_mass(2, 0), Categorical::point_mass(2, 0)}),
                  ValidationError);
  auto m = test::random_mdp(3, 3, 2, 4);
  nlohmann::json j = m;
  CHECK(mdp_from_json(j) == m);
  CHECK_THROWS_AS(mdp_from_json(nlohmann::json{{"S", 2}}), ValidationError);
}

TEST_CASE("evaluate_policy: trivial cases") {
  auto one = single_state(1.0, 6);
  CHECK(evaluate_policy(one, TimedPolicy::constant(6, 1, 0))(1, 0) == 6.0);
  auto zero = test::random_mdp(5, 3, 2, 4);
  std::vector<double> r(6, 0.0);
  TabularMdp z(3, 2, 4, 3, 0, r, std::vector<Categorical>(zero.transitions().begin(), zero.transitions().end()));
  auto v = evaluate_policy(z, TimedPolicy::constant(4, 3, 1));
  for (int h = 1; h <= 5; ++h)
    for (int s = 0; s < 3; ++s) CHECK(v(h, s) == 0.0);
  CHECK_THROWS_AS(evaluate_policy(z, TimedPolicy::constant(3, 3, 0)), ValidationError);
  CHECK_THROWS_AS(evaluate_policy(z, TimedPolicy::constant(4, 3, 2)), ValidationError);
}

TEST_CASE("evaluate_policy matches Monte-Carlo rollouts") {
  auto m = test::random_mdp(11, 3, 2, 4);
  auto pi = random_policy(m, 4);
  const double exact = evaluate_policy(m, pi)(1, m.initial_state());
  CounterRng rng(SeedSpec{99, 0, 0, StreamPurpose::kTest});
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    int s = m.initial_state();
    double g = 0.0;
    for (int h = 1; h <= m.horizon(); ++h) {
      const int a = pi(h, s);
      g += m.reward(s, a);
      s = m.transition(s, a).sample(rng.uniform());
    }
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) < 4 * se);
}

TEST_CASE("optimal_value") {
  SUBCASE("two-armed chain") {
    TabularMdp m(1, 2, 5, 1, 0, {1.0, 0.0}, {Categorical::point_mass(1, 0), Categorical::point_mass(1, 0)});
    auto sol = optimal_value(m);
    CHECK(sol.values(1, 0) == 5.0);
    for (int h = 1; h <= 5; ++h) CHECK(sol.policy(h, 0) == 0);
  }
  SUBCASE("identical actions tie to index 0") {
    auto base = test::random_mdp(2, 3, 1, 4);
    std::vector<double> r;
    std::vector<Categorical> p;
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 3; ++a) {
        r.push_back(base.reward(s, 0));
        p.push_back(base.transition(s, 0));
      }
    TabularMdp m(3, 3, 4, 3, 0, r, p);
    auto sol = optimal_value(m);
    auto v = evaluate_policy(m, random_policy(m, 1));
    for (int s = 0; s < 3; ++s) CHECK(sol.values(1, s) == doctest::Approx(v(1, s)).epsilon(1e-12));
    for (int a : sol.policy.actions()) CHECK(a == 0);
  }
  SUBCASE("dominates sampled policies and greedy is self-consistent") {
    auto m = test::random_mdp(21, 4, 3, 5);
    auto sol = optimal_value(m);
    for (int i = 0; i < 100; ++i) {
      auto v = evaluate_policy(m, random_policy(m, static_cast<std::uint64_t>(i)));
      for (int s = 0; s < 4; ++s) CHECK(sol.values(1, s) >= v(1, s) - 1e-12);
    }
    auto g = evaluate_policy(m, sol.policy);
    for (int h = 1; h <= 6; ++h)
      for (int s = 0; s < 4; ++s) CHECK(std::abs(g(h, s) - sol.values(h, s)) <= 1e-12);
  }
}

TEST_CASE("reward shift raises V* by c(H-h+1)") {
  auto m = test::random_mdp(31, 4, 2, 6);
  const double c = 0.7;
  std::vector<double> r(m.rewards().begin(), m.rewards().end());
  for (auto& x : r) x += c;
  TabularMdp shifted(4, 2, 6, 4, 0, r, std::vector<Categorical>(m.transitions().begin(), m.transitions().end()),
                     RewardRange::kNonNegative);
  auto a = optimal_value(m);
  auto b = optimal_value(shifted);
  for (int h = 1; h <= 7; ++h)
    for (int s = 0; s < 4; ++s) CHECK(std::abs(b.values(h, s) - a.values(h, s) - c * (6 - h + 1)) < 1e-9);
}
