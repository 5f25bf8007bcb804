#pragma once

// Literal full-table backward sweep of the delayed MVP planner, used as an
// oracle for the lazy planner. Tables cover every queue of length 0..D_max+1,
// every tag and every step, in the order: boundary at H+1, then per step
// Category 1, then Categories 2 and 3 by ascending queue length.

#include "sdmdp/augmented/aug_mdp.hpp"
#include "sdmdp/delayed/delayed_estimator.hpp"
#include "sdmdp/delayed/mvp_delayed.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace sdmdp::test {

inline double mvp_formula(double r, const std::vector<double>& p, const std::vector<double>& v, double n,
                          double ell, double H) {
  if (n <= 1) return H;
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * v[i];
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) var += p[i] * (v[i] - mean) * (v[i] - mean);
  return std::min(r + mean + 20.0 / 3.0 * std::sqrt(var * ell / n) + 400.0 / 9.0 * H * ell / n, H);
}

struct DenseSweep {
  struct Cell {
    double value = std::numeric_limits<double>::quiet_NaN();
    int action = -1;
  };
  std::map<std::uint64_t, Cell> table;
  AugIndexer indexer;

  const Cell* find(const AugState& st) const {
    auto it = table.find(indexer.key(st));
    return it == table.end() ? nullptr : &it->second;
  }
};

/// ell(len, b) supplies the log term; known selects the true delay model
/// for reveal queries.
template <class Ell>
DenseSweep dense_sweep(const TabularMdp& mdp, const DelayModel& d, const DelayedEstimator& est, bool known,
                       Ell&& ell) {
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
  const int Dm = d.d_max(), Tm = d.delta_max();
  DenseSweep out{{}, make_indexer(mdp, d)};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto V = [&](int s, const ActionQueue& q, int tag, int h) -> double {
    const auto* c = out.find(AugState{s, q, tag, h});
    return c ? c->value : nan;
  };
  auto set = [&](int s, const ActionQueue& q, int tag, int h, double v, int a = -1) {
    out.table[out.indexer.key(AugState{s, q, tag, h})] = {v, a};
  };
  std::vector<std::vector<ActionQueue>> queues(static_cast<std::size_t>(Dm + 2));
  queues[0].push_back(ActionQueue(A));
  for (int L = 1; L <= Dm + 1; ++L)
    for (const auto& q : queues[static_cast<std::size_t>(L - 1)])
      for (int a = 0; a < A; ++a) queues[static_cast<std::size_t>(L)].push_back(q.pushed(a));

  // Reveal query on (s, queue) after the transition; NaN when the true
  // conditioning event is impossible.
  auto reveal = [&](int s, const ActionQueue& q, int dt, int step, double vt, double vd) -> double {
    const int L = q.size();
    if (L == Dm + 1 || dt == Tm || step == H + 1) return vt;
    const int a1 = q.front();
    const bool fresh = L == 1 && dt == 0;
    if (known) {
      double p;
      if (fresh) {
        p = d.prob(s, a1, -1) + d.prob(s, a1, 0);
      } else {
        const double tail = d.tail(s, a1, dt);
        if (tail <= 0.0) return nan;
        p = d.prob(s, a1, dt) / tail;
      }
      if (p == 0.0) return vd;
      if (p == 1.0) return vt;
      return p * vt + (1.0 - p) * vd;
    }
    const double n = static_cast<double>(fresh ? est.n(s, a1, -1) : est.n(s, a1, dt));
    const double stay = static_cast<double>(fresh ? est.n(s, a1, 1) : est.n(s, a1, dt + 1));
    if (n <= 1) return H;
    const double p = (n - stay) / n;
    if (p == 1.0) vd = 0.0;
    if (p == 0.0) vt = 0.0;
    return mvp_formula(0.0, {p, 1.0 - p}, {vt, vd}, n, ell(L, 2.0), H);
  };
  auto successor = [&](int s, const ActionQueue& q, int h) -> double {
    const int a1 = q.front();
    const double n = static_cast<double>(est.n(s, a1));
    std::vector<double> p(static_cast<std::size_t>(S), 0.0), v(static_cast<std::size_t>(S), 0.0);
    if (const auto ph = est.p_hat(s, a1)) p = *ph;
    for (int x = 0; x < S; ++x) {
      const double vx = V(x, q.popped(), -1, h);
      v[static_cast<std::size_t>(x)] = p[static_cast<std::size_t>(x)] > 0.0 ? vx : 0.0;
    }
    return mvp_formula(mdp.reward(s, a1), p, v, n, ell(q.size(), mdp.branching_bound()), H);
  };
  auto categories23 = [&](int h) {
    for (int s = 0; s < S; ++s) set(s, queues[0][0], -1, h, h == H + 1 ? 0.0 : V(s, queues[0][0], 0, h));
    for (int L = 1; L <= Dm + 1; ++L) {
      for (const auto& q : queues[static_cast<std::size_t>(L)]) {
        for (int s = 0; s < S; ++s) set(s, q, kTranTag, h, successor(s, q, h));
        for (int s = 0; s < S; ++s) {
          set(s, q, -1, h, reveal(s, q, -1, h, V(s, q, kTranTag, h), h == H + 1 ? nan : V(s, q, 0, h)));
        }
      }
    }
  };

  for (int L = 0; L <= Dm; ++L)
    for (const auto& q : queues[static_cast<std::size_t>(L)])
      for (int s = 0; s < S; ++s)
        for (int t = 0; t <= Tm; ++t) set(s, q, t, H + 1, 0.0);
  categories23(H + 1);
  for (int h = H; h >= 1; --h) {
    for (int L = 0; L <= Dm; ++L) {
      for (const auto& q : queues[static_cast<std::size_t>(L)]) {
        for (int s = 0; s < S; ++s) {
          for (int t = 0; t <= Tm; ++t) {
            double best = -1.0;
            int arg = -1;
            for (int a = 0; a < A; ++a) {
              const ActionQueue q2 = q.pushed(a);
              const double vd = t + 1 <= Tm ? V(s, q2, t + 1, h + 1) : nan;
              const double qv = reveal(s, q2, t, h + 1, V(s, q2, kTranTag, h + 1), vd);
              if (qv > best) best = qv, arg = a;
            }
            set(s, q, t, h, arg < 0 ? nan : best, arg);
          }
        }
      }
    }
    categories23(h);
  }
  return out;
}

/// Counts after `episodes` episodes of the delayed learner (plan, act
/// greedily, update), with environment seeds (seed, 0, k).
inline DelayedEstimator train_delayed(const TabularMdp& mdp, const DelayModel& d, const AugPkdModel& model,
                                      int episodes, std::uint64_t seed) {
  DelayedEstimator est(mdp.num_states(), mdp.num_actions(), d.delta_max());
  DelayedEnv env(mdp, d);
  for (int k = 1; k <= episodes; ++k) {
    DelayedPlanner planner(model, est, kDefaultAugBudget);
    const auto* obs = &env.reset(SeedSpec{seed, 0, static_cast<std::uint64_t>(k)});
    while (!obs->done) obs = &env.step(planner.greedy(aug_state_of(*obs, mdp.num_actions())));
    est.update_from_log(env.finish_episode());
  }
  return est;
}

/// Reachable augmented states of the true dynamics, all actions allowed.
inline std::vector<AugState> reachable_states(const TabularMdp& mdp, const DelayModel& d) {
  const AugIndexer idx = make_indexer(mdp, d);
  std::map<std::uint64_t, bool> seen;
  std::vector<AugState> order{initial_aug_state(mdp)};
  seen[idx.key(order[0])] = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const AugState st = order[i];
    if (is_terminal(st, mdp.horizon())) continue;
    const int n = st.is_decision() ? mdp.num_actions() : 1;
    for (int a = 0; a < n; ++a) {
      const auto outs = st.is_decision() ? aug_successors(mdp, d, st, a) : aug_successors(mdp, d, st);
      for (const auto& o : outs) {
        if (seen.emplace(idx.key(o.next), true).second) order.push_back(o.next);
      }
    }
  }
  return order;
}

}  // namespace sdmdp::test
