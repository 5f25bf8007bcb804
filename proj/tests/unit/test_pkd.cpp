#include "doctest.h"
#include "test_support.hpp"

#include "sdmdp/core/errors.hpp"
#include "sdmdp/pkd/estimator.hpp"
#include "sdmdp/pkd/flat.hpp"
#include "sdmdp/pkd/mvp_est.hpp"
#include "sdmdp/pkd/regret_trace.hpp"

#include <cmath>
#include <sstream>

using namespace sdmdp;

namespace {

// Closed form of the optimistic estimate, written out with a two-pass variance.
double mvp_oracle(double r, const std::vector<double>& p, const std::vector<double>& v, double n, double ell,
                  double H) {
  if (n <= 1) return H;
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * v[i];
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) var += p[i] * (v[i] - mean) * (v[i] - mean);
  return std::min(r + mean + 20.0 / 3.0 * std::sqrt(var * ell / n) + 400.0 / 9.0 * H * ell / n, H);
}

double second_half_slope(const std::vector<TraceRow>& rows) {
  const std::size_t K = rows.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = K / 2; k <= K; ++k) {
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(rows[k - 1].cumulative_regret);
    sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("mvp_est examples") {
  const std::vector<double> p{0.5, 0.5};
  CHECK(mvp_est(0.3, p, std::vector<double>{1, 2}, 0, 2.0, 5.0) == 5.0);
  CHECK(mvp_est(0.3, p, std::vector<double>{1, 2}, 1, 2.0, 5.0) == 5.0);
  CHECK(mvp_est(0.0, p, std::vector<double>{1.5, 1.5}, 1'000'000'000, 1.0, 5.0) ==
        doctest::Approx(1.5).epsilon(1e-6));

  // r = 0.5, P = (.5, .5), V = (0, H), N = 100, ell = 2, H = 5.
  const double got = mvp_est(0.5, p, std::vector<double>{0, 5}, 100, 2.0, 5.0);
  CHECK(got == mvp_oracle(0.5, p, {0, 5}, 100, 2.0, 5.0));
  CHECK(got == 5.0);  // 0.5 + 2.5 + 2.357 + 4.444 is above the cap
  const double uncapped = mvp_est(0.5, p, std::vector<double>{0, 5}, 100, 2.0, 100.0);
  CHECK(uncapped == doctest::Approx(0.5 + 2.5 + 20.0 / 3.0 * std::sqrt(6.25 * 0.02) + 400.0 / 9.0 * 2.0).epsilon(1e-12));
}

TEST_CASE("weighted variance matches two-pass form") {
  CounterRng rng(SeedSpec{3, 0, 0, StreamPurpose::kTest});
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.below(6));
    auto p = test::dirichlet(rng, n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = 10.0 * rng.uniform();
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) mean += p[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i) {
      var += p[static_cast<std::size_t>(i)] * std::pow(v[static_cast<std::size_t>(i)] - mean, 2);
    }
    CHECK(weighted_variance(p, v) == doctest::Approx(var).epsilon(1e-12));
    CHECK(weighted_variance(p, v) >= 0.0);
  }
}

TEST_CASE("mvp_est is monotone in ell and N and capped") {
  CounterRng rng(SeedSpec{4, 0, 0, StreamPurpose::kTest});
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const auto p = test::dirichlet(rng, n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = 6.0 * rng.uniform();
    const double r = rng.uniform();
    const auto N = 2 + rng.below(5000);
    const double ell = 0.1 + 30.0 * rng.uniform();
    const double base = mvp_est(r, p, v, N, ell, 6.0);
    CHECK(base <= 6.0);
    CHECK(mvp_est(r, p, v, N, ell * 1.5, 6.0) >= base);
    CHECK(mvp_est(r, p, v, N + 1 + rng.below(100), ell, 6.0) <= base);
  }
}

TEST_CASE("ell_star_generic") {
  const double H = 5, Z = 12, K = 1000, d = 0.1;
  const double first = std::log(32 * H * 3 * Z * K / d);
  const double second_b1 = std::log(32 * H * Z * K / d);
  CHECK(ell_star_generic(3, Z, H, K, d, 1) == doctest::Approx(second_b1).epsilon(1e-14));
  CHECK(second_b1 <= first);
  const double X = 4;
  const double second = X * std::log(32 * H * X * Z * K / d);
  CHECK(ell_star_generic(1, Z, H, K, d, X) ==
        doctest::Approx(std::min(std::log(32 * H * Z * K / d), second)).epsilon(1e-14));
  for (double k : {10.0, 1000.0, 1e6}) {
    const double a = ell_star_generic(7, Z, H, k, d, 3);
    const double b = ell_star_generic(7, Z, H, 2 * k, d, 3);
    CHECK(b >= a);
    CHECK(b - a <= std::log(2.0) * 3 + 1e-12);
    CHECK(ell_star_generic(7, Z, H, 2 * k, d, 1) - ell_star_generic(7, Z, H, k, d, 1) <= std::log(2.0) + 1e-12);
  }
  CHECK_THROWS_AS(ell_star_generic(1, Z, H, K, 1.0, 1), ValidationError);
}

TEST_CASE("EffEstimator counts") {
  EffEstimator est;
  CHECK(est.lookup(7).count == 0);
  est.add(7, 3);
  auto v = est.lookup(7);
  CHECK(v.count == 1);
  REQUIRE(v.outcomes.size() == 1);
  CHECK(v.outcomes[0] == 3);
  CHECK(v.probs[0] == 1.0);
  est.add(7, 1);
  v = est.lookup(7);
  REQUIRE(v.outcomes.size() == 2);
  CHECK(v.outcomes[0] == 1);
  CHECK(v.probs[0] == 0.5);
  CHECK(v.probs[1] == 0.5);
  CHECK(est.num_features() == 1);
  CHECK(est.total() == 2);
}

TEST_CASE("EffEstimator concentration") {
  const std::vector<double> truth{0.1, 0.25, 0.4, 0.25};
  const auto cat = Categorical::from_probabilities(truth);
  int good = 0;
  for (int rep = 0; rep < 100; ++rep) {
    CounterRng rng(SeedSpec{5, static_cast<std::uint64_t>(rep), 0, StreamPurpose::kTest});
    EffEstimator est;
    for (int i = 0; i < 10'000; ++i) est.add(1, cat.sample(rng.uniform()));
    const auto v = est.lookup(1);
    std::vector<double> p(4, 0.0);
    for (std::size_t i = 0; i < v.outcomes.size(); ++i) p[static_cast<std::size_t>(v.outcomes[i])] = v.probs[i];
    double tv = 0.0;
    for (int i = 0; i < 4; ++i) tv += 0.5 * std::abs(p[static_cast<std::size_t>(i)] - truth[static_cast<std::size_t>(i)]);
    good += tv <= 0.05;
  }
  CHECK(good >= 99);
}

TEST_CASE("cold start plans H everywhere") {
  const auto mdp = test::random_mdp(1, 3, 2, 4);
  const auto spec = plain_mvp_spec(mdp, 5.0);
  const FlatPkdModel model(spec);
  EffEstimator est;
  FlatPlanner planner(model, est, 1'000'000);
  for (int h = 1; h <= 4; ++h)
    for (int s = 0; s < 3; ++s) {
      CHECK(planner.value({s, h}) == 4.0);
      CHECK(planner.greedy({s, h}) == 0);
    }
  CHECK(planner.value({0, 5}) == 0.0);
}

TEST_CASE("singleton-Y planner equals direct MVP value iteration") {
  const int S = 4, A = 3, H = 5;
  const auto mdp = test::random_mdp(2, S, A, H);
  const double ell = 2.5;
  const auto spec = plain_mvp_spec(mdp, ell);
  const FlatPkdModel model(spec);
  EffEstimator est;
  std::vector<double> n(static_cast<std::size_t>(S * A), 0.0);
  std::vector<std::vector<double>> hits(static_cast<std::size_t>(S * A), std::vector<double>(S, 0.0));
  CounterRng rng(SeedSpec{2, 0, 0, StreamPurpose::kTest});
  for (int round : {0, 1, 2}) {
    const int samples = round == 0 ? 20 : (round == 1 ? 500 : 20'000);
    for (int i = 0; i < samples; ++i) {
      const int s = static_cast<int>(rng.below(S));
      const int a = static_cast<int>(rng.below(A));
      if (s == 3 && a == 2) continue;  // keep one pair unvisited
      const int next = mdp.transition(s, a).sample(rng.uniform());
      est.add(static_cast<std::uint64_t>(s * A + a), next);
      n[static_cast<std::size_t>(s * A + a)] += 1;
      hits[static_cast<std::size_t>(s * A + a)][static_cast<std::size_t>(next)] += 1;
    }
    std::vector<double> next_v(S, 0.0);
    FlatPlanner planner(model, est, 1'000'000);
    for (int h = H; h >= 1; --h) {
      std::vector<double> v(S, 0.0);
      for (int s = 0; s < S; ++s) {
        double best = -1;
        int arg = -1;
        for (int a = 0; a < A; ++a) {
          const auto i = static_cast<std::size_t>(s * A + a);
          std::vector<double> p(S, 0.0);
          for (int x = 0; x < S; ++x) p[static_cast<std::size_t>(x)] = n[i] > 0 ? hits[i][static_cast<std::size_t>(x)] / n[i] : 0.0;
          const double q = mvp_oracle(mdp.reward(s, a), p, next_v, n[i], ell, H);
          if (q > best) best = q, arg = a;
        }
        v[static_cast<std::size_t>(s)] = best;
        CHECK(planner.value({s, h}) == doctest::Approx(best).epsilon(1e-12));
        CHECK(std::abs(planner.value({s, h}) - best) <= 1e-12);
        CHECK(planner.greedy({s, h}) == arg);
      }
      next_v = v;
    }
  }
}

TEST_CASE("flat learner converges on a two-state instance") {
  // Deterministic two-state chain: the bonus is then the c2 H ell / N term alone.
  const TabularMdp mdp(2, 2, 2, 1, 0, {0.3, 0.6, 0.9, 0.1},
                       {Categorical::point_mass(2, 0), Categorical::point_mass(2, 1), Categorical::point_mass(2, 1),
                        Categorical::point_mass(2, 0)});
  RunOptions opts;
  opts.episodes = 100'000;
  opts.oracle_stride = 1000;
  opts.seed = 3;
  opts.replan = ReplanSchedule::kDoubling;
  const auto spec = plain_mvp_spec(mdp, ell_star_generic(1, 4, 2, opts.episodes, opts.delta, 1));
  const auto trace = run_flat_pkd(spec, mdp, opts);
  const double vstar = optimal_value(mdp).values(1, 0);
  CHECK(std::abs(trace.rows().back().value_estimate - vstar) <= 0.05);
  CHECK(trace.rows().back().value_estimate >= vstar - 1e-9);
}

TEST_CASE("bandit regret is sublinear") {
  // One state, H = 1: arms with known rewards still need their bonus to shrink.
  std::vector<double> r{0.1, 0.9};
  const TabularMdp mdp(1, 2, 1, 1, 0, r, std::vector<Categorical>(2, Categorical::point_mass(1, 0)));
  RunOptions opts;
  opts.episodes = 10'000;
  opts.oracle_stride = 1;
  const auto spec = plain_mvp_spec(mdp, ell_star_generic(1, 2, 1, opts.episodes, opts.delta, 1));
  const auto trace = run_flat_pkd(spec, mdp, opts);
  const double slope = second_half_slope(trace.rows());
  CHECK(slope < 0.75);
}

TEST_CASE("flat optimism over seeds") {
  const auto mdp = test::random_mdp(21, 3, 2, 3);
  const double vstar = optimal_value(mdp).values(1, 0);
  int below = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunOptions opts;
    opts.episodes = 300;
    opts.oracle_stride = 0;
    opts.seed = seed;
    const auto spec = plain_mvp_spec(mdp, ell_star_generic(1, 6, 3, opts.episodes, opts.delta, 3));
    for (const auto& row : run_flat_pkd(spec, mdp, opts).rows()) {
      below += row.value_estimate < vstar - 1e-9;
      ++total;
    }
  }
  CHECK(below <= 0.1 * total);
}

TEST_CASE("run determinism and csv") {
  const auto mdp = test::random_mdp(8, 3, 2, 3);
  RunOptions opts;
  opts.episodes = 200;
  opts.oracle_stride = 7;
  opts.seed = 42;
  const auto spec = plain_mvp_spec(mdp, 3.0);
  std::ostringstream a, b;
  run_flat_pkd(spec, mdp, opts).write_csv(a);
  run_flat_pkd(spec, mdp, opts).write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind(kTraceHeader, 0) == 0);

  std::istringstream in(a.str());
  const auto rows = RegretTrace::read_csv(in, "a.csv");
  REQUIRE(rows.size() == 200);
  CHECK(rows[0].exact_policy_value.has_value());
  CHECK(!rows[1].exact_policy_value.has_value());
  CHECK(rows[6].exact_policy_value.has_value());
  CHECK(rows[199].seed == 42);

  opts.episodes = 0;
  CHECK(run_flat_pkd(spec, mdp, opts).rows().empty());

  std::istringstream bad(std::string(kTraceHeader) + "\n1,0.5,1,,0.1,0\n2,x,1,,0.2,0\n");
  try {
    RegretTrace::read_csv(bad, "bad.csv");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  CHECK(replan_from_string("doubling") == ReplanSchedule::kDoubling);
  CHECK(replan_from_string(to_string(ReplanSchedule::kEveryEpisode)) == ReplanSchedule::kEveryEpisode);
  CHECK_THROWS_AS(replan_from_string("weekly"), ValidationError);
}

TEST_CASE("factored update rejects transitions the known kernel excludes") {
  // Y = s mod 2 is known; make the chain deterministic in Y.
  std::vector<Categorical> p{Categorical::from_probabilities({0.0, 0.5, 0.0, 0.5}),
                             Categorical::from_probabilities({0.5, 0.0, 0.5, 0.0}),
                             Categorical::from_probabilities({0.0, 0.5, 0.0, 0.5}),
                             Categorical::from_probabilities({0.5, 0.0, 0.5, 0.0})};
  const TabularMdp mdp(4, 1, 2, 2, 0, {0.1, 0.2, 0.3, 0.4}, p);
  const auto spec = factored_spec(mdp, 2, [](int s, int, int y) { return static_cast<std::uint64_t>(s * 2 + y); },
                                  [](std::uint64_t) { return 1.0; });
  EffEstimator est;
  update_flat(est, spec, {0, 1, 2}, {0, 0});
  CHECK(est.count(1) == 1);
  CHECK_THROWS_AS(update_flat(est, spec, {0, 2, 1}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(factored_spec(mdp, 3, spec.feature, spec.ell), ValidationError);
}
