#include "doctest.h"
#include "test_support.hpp"

#include "sdmdp/core/errors.hpp"
#include "sdmdp/delay/delayed_env.hpp"

#include <map>

using namespace sdmdp;

namespace {

// Two-state MDP where every transition has full support, so any replayed
// trajectory is feasible.
TabularMdp full_support(int H) {
  std::vector<double> r{0.1, 0.2, 0.3, 0.4};
  std::vector<Categorical> p(4, Categorical::from_probabilities({0.5, 0.5}));
  return TabularMdp(2, 2, H, 2, 0, r, p);
}

DelayModel uniform_delay(int S, int A, int delta_max, int d_max) {
  std::vector<double> row(static_cast<std::size_t>(delta_max + 2), 1.0 / (delta_max + 2));
  return DelayModel(S, A, delta_max, d_max, true,
                    std::vector<Categorical>(static_cast<std::size_t>(S * A), Categorical::normalized(row)));
}

void check_obs(const DelayedObservation& o, int s, std::vector<int> q, int dt, int h) {
  CHECK(o.last_state == s);
  CHECK(o.queue == q);
  CHECK(o.delta_tilde == dt);
  CHECK(o.step == h);
}

}  // namespace

TEST_CASE("delay model validation and json") {
  CHECK_THROWS_AS(DelayModel(1, 1, 3, 2, true, {Categorical::point_mass(5, 1)}), ValidationError);
  CHECK_THROWS_AS(DelayModel(1, 1, 1, 2, true, {Categorical::point_mass(2, 1)}), ValidationError);
  auto d = uniform_delay(2, 2, 2, 3);
  CHECK(d.prob(0, 0, -1) == doctest::Approx(0.25));
  CHECK(d.tail(0, 0, 1) == doctest::Approx(0.5));
  nlohmann::json j = d;
  CHECK(j["p_delay"].size() == 4);
  CHECK(delay_from_json(j, 2, 2) == d);
}

TEST_CASE("reset gives the initial observation") {
  auto m = full_support(6);
  auto d = uniform_delay(2, 2, 2, 3);
  DelayedEnv env(m, d);
  const auto& o = env.reset(SeedSpec{1});
  check_obs(o, 0, {}, 0, 1);
  CHECK_THROWS_AS(env.finish_episode(), EpisodeError);
}

TEST_CASE("constant delay replay (fast mode, H=6, D=2)") {
  auto m = full_support(6);
  auto inst = make_cdmdp(m, 2, CdmdpMode::kFast);
  DelayedEnv env(inst.mdp, inst.delay);
  env.reset(SeedSpec{3});
  // s_1..s_7 = 0,1,0,1,0,1,0 and a_h = h % 2.
  const std::vector<int> next{1, 0, 1, 0, 1, 0};
  check_obs(env.step_with(1, next[0], 0), 0, {1}, 1, 2);
  check_obs(env.step_with(0, next[1], 0), 0, {1, 0}, 2, 3);
  check_obs(env.step_with(1, next[2], 0), 1, {0, 1}, 0, 4);
  check_obs(env.step_with(0, next[3], 0), 0, {1, 0}, 0, 5);
  check_obs(env.step_with(1, next[4], 0), 1, {0, 1}, 0, 6);
  const auto& last = env.step_with(0, next[5], 0);
  CHECK(last.done);
  CHECK(last.newly_revealed.empty());
  auto log = env.finish_episode();
  CHECK(log.delays == std::vector<int>{2, 2, 2, 2, 2, 2, 2});
  CHECK(log.reveal_steps == std::vector<int>{1, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(env.step(0), EpisodeError);
}

TEST_CASE("stochastic delay replay with a same-step double reveal") {
  auto m = full_support(6);
  auto d = uniform_delay(2, 2, 2, 3);
  DelayedEnv env(m, d);
  env.reset(SeedSpec{3});
  // Delta = (1, 2, -1, 1, 0, 0); states s_2..s_7 = 1, 0, 1, 0, 1, 0.
  check_obs(env.step_with(0, 1, 1), 0, {0}, 1, 2);
  const auto& o3 = env.step_with(1, 0, 2);
  check_obs(o3, 1, {1}, 0, 3);
  CHECK(o3.newly_revealed == std::vector<std::pair<int, int>>{{1, 2}});
  check_obs(env.step_with(0, 1, -1), 1, {1, 0}, 1, 4);
  check_obs(env.step_with(1, 0, 1), 1, {1, 0, 1}, 2, 5);
  const auto& o6 = env.step_with(0, 1, 0);
  check_obs(o6, 1, {1, 0}, 0, 6);
  CHECK(o6.newly_revealed == std::vector<std::pair<int, int>>{{0, 3}, {1, 4}});
  env.step_with(1, 0, 0);
  auto log = env.finish_episode();
  CHECK(log.deltas == std::vector<int>{1, 2, -1, 1, 0, 0});
  CHECK(std::vector<int>(log.delays.begin() + 1, log.delays.begin() + 5) == std::vector<int>{1, 3, 2, 3});
  CHECK(log.total_reward() == doctest::Approx(0.1 + 0.4 + 0.1 + 0.4 + 0.1 + 0.4));
  CHECK_THROWS_AS(DelayedEnv(m, d).step_with(0, 0, 0), EpisodeError);
}

TEST_CASE("zero delay reveals every state at once") {
  auto m = test::random_mdp(4, 3, 2, 8);
  auto d = DelayModel::zero_delay(3, 2);
  DelayedEnv env(m, d);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto* o = &env.reset(SeedSpec{k});
    std::vector<int> seen;
    while (!o->done) {
      CHECK(o->queue.empty());
      CHECK(o->delta_tilde == 0);
      seen.push_back(o->last_state);
      o = &env.step(static_cast<int>(k % 2));
    }
    auto log = env.finish_episode();
    CHECK(seen == std::vector<int>(log.states.begin(), log.states.end() - 1));
    for (int x : log.delays) CHECK(x == 0);
  }
}

TEST_CASE("logged episodes satisfy the delay recursion and lag bounds") {
  auto m = test::random_mdp(8, 3, 2, 10);
  auto d = test::random_delay(8, 3, 2, 2, 3);
  DelayedEnv env(m, d);
  for (std::uint64_t k = 0; k < 300; ++k) {
    const auto* o = &env.reset(SeedSpec{5, 0, k});
    std::vector<DelayedObservation> trace;
    while (!o->done) {
      trace.push_back(*o);
      o = &env.step(static_cast<int>(mix64(k * 31 + trace.size()) % 2));
    }
    auto log = env.finish_episode();
    CHECK(log.delays[0] == 0);
    double total = 0.0;
    for (int h = 1; h <= 10; ++h) {
      CHECK(log.delays[h] == std::clamp(log.delays[h - 1] + log.deltas[h - 1], 0, 3));
      CHECK(log.reveal_steps[h] == h + 1 + log.delays[h]);
      total += log.rewards[h - 1];
      const auto& ob = trace[static_cast<std::size_t>(h - 1)];
      const int t = h - static_cast<int>(ob.queue.size());
      CHECK(ob.queue.size() <= 4);
      CHECK(ob.last_state == log.states[t - 1]);
      CHECK(ob.delta_tilde == h - (t + log.delays[t - 1]));
      // causality: everything after t_h is still hidden
      CHECK(log.reveal_steps[t - 1] <= h);
      if (t < 11) CHECK(log.reveal_steps[t] > h);
      for (const auto& [s, time] : ob.newly_revealed) {
        CHECK(log.reveal_steps[time - 1] == h);
        CHECK(log.states[time - 1] == s);
      }
    }
    CHECK(total == doctest::Approx(log.total_reward()));
  }
}

TEST_CASE("inter-arrival frequencies match p_delay and are independent of transitions") {
  auto m = test::random_mdp(12, 2, 2, 3);
  auto d = test::random_delay(12, 2, 2, 2, 2);
  DelayedEnv env(m, d);
  const int n = 10000;
  std::map<std::pair<int, int>, int> joint;
  std::vector<int> delta_count(4, 0), next_count(2, 0);
  for (int k = 0; k < n; ++k) {
    env.reset(SeedSpec{77, 0, static_cast<std::uint64_t>(k)});
    env.step(1);
    env.step(0);
    env.step(0);
    auto log = env.finish_episode();
    ++delta_count[static_cast<std::size_t>(log.deltas[0] + 1)];
    ++next_count[static_cast<std::size_t>(log.states[1])];
    ++joint[{log.states[1], log.deltas[0]}];
  }
  for (int x = -1; x <= 2; ++x) {
    const double p = d.prob(0, 1, x);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(delta_count[static_cast<std::size_t>(x + 1)] / double(n) - p) <= 4 * se + 1e-12);
  }
  for (int s = 0; s < 2; ++s)
    for (int x = -1; x <= 2; ++x) {
      const double q = m.transition(0, 1)[s] * d.prob(0, 1, x);
      const double se = std::sqrt(q * (1 - q) / n);
      CHECK(std::abs(joint[{s, x}] / double(n) - q) <= 4.5 * se + 1e-12);
    }
}

TEST_CASE("make_cdmdp") {
  auto m = test::random_mdp(13, 3, 2, 6);
  CHECK_THROWS_AS(make_cdmdp(m, 3, CdmdpMode::kFast, 2), ValidationError);
  CHECK_THROWS_AS(make_cdmdp(m, 3, CdmdpMode::kStrict, 2), ValidationError);
  auto id = make_cdmdp(m, 0, CdmdpMode::kFast);
  CHECK(id.mdp == m);
  CHECK(id.delay == DelayModel::zero_delay(3, 2));

  auto strict = make_cdmdp(m, 2, CdmdpMode::kStrict, 3);
  CHECK(strict.mdp.num_states() == 4);
  CHECK(strict.mdp.horizon() == 7);
  CHECK(strict.mdp.initial_state() == 3);
  CHECK(strict.delay.prob(3, 1, 2) == 1.0);
  CHECK(strict.delay.prob(0, 1, 0) == 1.0);
}

TEST_CASE("strict and fast constant-delay constructions agree in distribution") {
  auto m = test::random_mdp(14, 3, 2, 6);
  const int n = 10000;
  for (int D = 1; D <= 3; ++D) {
    auto fast = make_cdmdp(m, D, CdmdpMode::kFast);
    auto strict = make_cdmdp(m, D, CdmdpMode::kStrict);
    auto policy = [&](int s, std::size_t q, int h) { return static_cast<int>((s + q + static_cast<std::size_t>(h)) % 2); };
    // obs_freq[mode][h][s]
    std::vector<std::vector<std::vector<double>>> freq(2, std::vector<std::vector<double>>(7, std::vector<double>(3, 0.0)));
    double sum[2] = {0, 0}, sum2[2] = {0, 0};
    for (int mode = 0; mode < 2; ++mode) {
      const auto& inst = mode == 0 ? fast : strict;
      DelayedEnv env(inst.mdp, inst.delay);
      for (int k = 0; k < n; ++k) {
        const auto* o = &env.reset(SeedSpec{1000u + static_cast<std::uint64_t>(D), 0, static_cast<std::uint64_t>(k)});
        if (mode == 1) o = &env.step(0);
        while (!o->done) {
          const int s = o->last_state == 3 ? m.initial_state() : o->last_state;
          const int h = o->step - mode;
          const std::size_t q = o->queue.size() - static_cast<std::size_t>(o->last_state == 3 ? 1 : 0);
          freq[static_cast<std::size_t>(mode)][static_cast<std::size_t>(h)][static_cast<std::size_t>(s)] += 1.0 / n;
          o = &env.step(policy(s, q, h));
        }
        const double g = env.accrued_reward();
        sum[mode] += g;
        sum2[mode] += g * g;
      }
    }
    double var = 0.0;
    for (int mode = 0; mode < 2; ++mode) {
      const double mu = sum[mode] / n;
      var += (sum2[mode] / n - mu * mu) / n;
    }
    CHECK(std::abs(sum[0] / n - sum[1] / n) <= 4.5 * std::sqrt(var) + 1e-12);
    for (int h = 1; h <= 6; ++h)
      for (int s = 0; s < 3; ++s) {
        const double a = freq[0][static_cast<std::size_t>(h)][static_cast<std::size_t>(s)];
        const double b = freq[1][static_cast<std::size_t>(h)][static_cast<std::size_t>(s)];
        const double p = (a + b) / 2;
        CHECK(std::abs(a - b) <= 4.5 * std::sqrt(2 * p * (1 - p) / n) + 1e-12);
      }
  }
}
