#include "sdmdp/augmented/aug_mdp.hpp"

#include "sdmdp/core/errors.hpp"

#include "json.hpp"

#include <deque>
#include <ostream>
#include <string>

namespace sdmdp {

RevealFlags reveal_flags(const DelayModel& d, int horizon, const ActionQueue& queue, int delta_tilde,
                         int step) {
  RevealFlags f;
  f.queue_full = queue.size() == d.d_max() + 1;
  f.horizon_end = step == horizon + 1;
  f.queue_empty = queue.empty();
  f.fresh_draw = queue.size() == 1 && delta_tilde == 0;
  f.constant_first = d.constant_mode().has_value() && !queue.empty() && step - queue.size() == 1;
  return f;
}

RevealKind reveal_kind(const RevealFlags& f, int delta_tilde, int delta_max) {
  if (f.queue_full || f.horizon_end || delta_tilde == delta_max) return RevealKind::kForced;
  if (f.queue_empty && delta_tilde == -1) return RevealKind::kNever;
  if (f.constant_first) return RevealKind::kConstantFirst;
  if (f.fresh_draw) return RevealKind::kFresh;
  return RevealKind::kRegular;
}

double p_tran(const DelayModel& d, int s, int a, int delta_tilde, const RevealFlags& flags) {
  if (delta_tilde < -1 || delta_tilde > d.delta_max()) {
    throw ValidationError("delta_tilde " + std::to_string(delta_tilde) + " outside [-1, delta_max]");
  }
  switch (reveal_kind(flags, delta_tilde, d.delta_max())) {
    case RevealKind::kForced:
      return 1.0;
    case RevealKind::kNever:
      return 0.0;
    case RevealKind::kConstantFirst:
      return delta_tilde == *d.constant_mode() ? 1.0 : 0.0;
    case RevealKind::kFresh:
      return d.prob(s, a, -1) + d.prob(s, a, 0);
    case RevealKind::kRegular:
      break;
  }
  const double tail = d.tail(s, a, delta_tilde);
  if (!(tail > 0.0)) {
    throw UnreachableError("P_tran undefined: no inter-arrival mass at or above " +
                           std::to_string(delta_tilde) + " for (s=" + std::to_string(s) +
                           ", a=" + std::to_string(a) + ")");
  }
  return std::min(1.0, d.prob(s, a, delta_tilde) / tail);
}

AugState initial_aug_state(const TabularMdp& mdp) {
  return AugState{mdp.initial_state(), ActionQueue(mdp.num_actions()), 0, 1};
}

AugState aug_state_of(const DelayedObservation& obs, int num_actions) {
  return AugState{obs.last_state, ActionQueue::from(obs.queue, num_actions), obs.delta_tilde, obs.step};
}

bool is_terminal(const AugState& st, int horizon) {
  if (st.h <= horizon) return false;
  return st.is_decision() || (st.tag == -1 && st.queue.empty());
}

namespace {

template <class F>
void for_each_successor(const TabularMdp& mdp, const DelayModel& d, const AugState& st, int action,
                        F&& f) {
  const int H = mdp.horizon();
  if (st.is_decision()) {
    const ActionQueue q = st.queue.pushed(action);
    const RevealFlags flags = reveal_flags(d, H, q, st.tag, st.h + 1);
    const double p = p_tran(d, st.s, q.front(), st.tag, flags);
    if (p > 0.0) f(AugState{st.s, q, kTranTag, st.h + 1}, p, 0.0);
    if (p < 1.0) f(AugState{st.s, q, st.tag + 1, st.h + 1}, 1.0 - p, 0.0);
    return;
  }
  if (st.is_tran()) {
    const int a1 = st.queue.front();
    const double r = mdp.reward(st.s, a1);
    const auto& row = mdp.transition(st.s, a1);
    const ActionQueue rest = st.queue.popped();
    for (int s2 : row.support()) f(AugState{s2, rest, -1, st.h}, row[s2], r);
    return;
  }
  if (st.queue.empty()) {
    if (st.h <= H) f(AugState{st.s, st.queue, 0, st.h}, 1.0, 0.0);
    return;
  }
  const RevealFlags flags = reveal_flags(d, H, st.queue, -1, st.h);
  const double p = p_tran(d, st.s, st.queue.front(), -1, flags);
  if (p > 0.0) f(AugState{st.s, st.queue, kTranTag, st.h}, p, 0.0);
  if (p < 1.0) f(AugState{st.s, st.queue, 0, st.h}, 1.0 - p, 0.0);
}

void check_state(const TabularMdp& mdp, const DelayModel& d, const AugState& st) {
  if (st.s < 0 || st.s >= mdp.num_states() || st.h < 1 || st.h > mdp.horizon() + 1 ||
      st.queue.size() > d.d_max() + 1 || st.tag < kTranTag || st.tag > d.delta_max() ||
      (st.is_tran() && st.queue.empty())) {
    throw ValidationError("malformed augmented state " + to_string(st));
  }
}

enum class Mode { kOptimal, kPolicy, kUniform };

class Solver {
 public:
  Solver(const TabularMdp& mdp, const DelayModel& d, std::size_t budget, Mode mode,
         const DelayedPolicy* policy)
      : mdp_(mdp),
        d_(d),
        indexer_(make_indexer(mdp, d)),
        memo_(indexer_.size()),
        budget_(budget),
        mode_(mode),
        policy_(policy),
        decisions_(indexer_) {}

  double value(const AugState& st) {
    if (is_terminal(st, mdp_.horizon())) return 0.0;
    const std::uint64_t key = indexer_.key(st);
    if (const double* v = memo_.find(key)) return *v;
    double v = 0.0;
    if (st.is_decision()) {
      const int A = mdp_.num_actions();
      if (mode_ == Mode::kOptimal) {
        double best = -1.0;
        int arg = 0;
        for (int a = 0; a < A; ++a) {
          const double q = q_value(st, a);
          if (q > best) {
            best = q;
            arg = a;
          }
        }
        decisions_.set(st, arg);
        v = best;
      } else if (mode_ == Mode::kPolicy) {
        const int a = (*policy_)(st);
        if (a < 0 || a >= A) {
          throw ValidationError("policy undefined at reachable state " + to_string(st));
        }
        v = q_value(st, a);
      } else {
        for (int a = 0; a < A; ++a) v += q_value(st, a);
        v /= A;
      }
    } else {
      v = q_value(st, 0);
    }
    memo_.insert(key, v);
    if (memo_.size() > budget_) {
      throw ResourceError("reachable augmented states exceed budget of " + std::to_string(budget_),
                          memo_.size());
    }
    return v;
  }

  std::size_t reachable() const { return memo_.size(); }
  DecisionMap take_decisions() { return std::move(decisions_); }

 private:
  double q_value(const AugState& st, int action) {
    double acc = 0.0;
    for_each_successor(mdp_, d_, st, action, [&](const AugState& next, double p, double r) {
      acc += p * (r + value(next));
    });
    return acc;
  }

  const TabularMdp& mdp_;
  const DelayModel& d_;
  AugIndexer indexer_;
  AugMemo<double> memo_;
  std::size_t budget_;
  Mode mode_;
  const DelayedPolicy* policy_;
  DecisionMap decisions_;
};

void check_pair(const TabularMdp& mdp, const DelayModel& d) {
  if (d.num_states() != mdp.num_states() || d.num_actions() != mdp.num_actions()) {
    throw ValidationError("delay model dimensions do not match the MDP");
  }
}

}  // namespace

std::vector<AugOutcome> aug_successors(const TabularMdp& mdp, const DelayModel& d,
                                       const AugState& st, std::optional<int> action) {
  check_state(mdp, d, st);
  if (st.is_decision()) {
    if (st.h > mdp.horizon()) {
      if (action) throw ValidationError("no action is taken at step H + 1");
      return {};
    }
    if (!action) throw ValidationError("decision state " + to_string(st) + " needs an action");
    if (*action < 0 || *action >= mdp.num_actions()) throw ValidationError("action out of range");
  } else if (action) {
    throw ValidationError("intermediate state " + to_string(st) + " takes no action");
  }
  std::vector<AugOutcome> out;
  for_each_successor(mdp, d, st, action.value_or(0), [&](const AugState& next, double p, double r) {
    out.push_back(AugOutcome{next, p, r});
  });
  return out;
}

int DecisionMap::action(const AugState& st) const {
  auto it = actions_.find(indexer_.key(st));
  return it == actions_.end() ? -1 : it->second;
}

DelayedPolicy DecisionMap::as_policy() const {
  return [this](const AugState& st) { return action(st); };
}

AugIndexer make_indexer(const TabularMdp& mdp, const DelayModel& d) {
  return AugIndexer(mdp.num_states(), mdp.num_actions(), mdp.horizon(), d.d_max(), d.delta_max());
}

DelayedOptimum optimal_delayed_value(const TabularMdp& mdp, const DelayModel& d, std::size_t budget) {
  check_pair(mdp, d);
  Solver solver(mdp, d, budget, Mode::kOptimal, nullptr);
  const double v = solver.value(initial_aug_state(mdp));
  return DelayedOptimum{v, solver.take_decisions(), solver.reachable()};
}

double evaluate_delayed_policy(const TabularMdp& mdp, const DelayModel& d, const DelayedPolicy& policy,
                               std::size_t budget) {
  check_pair(mdp, d);
  Solver solver(mdp, d, budget, Mode::kPolicy, &policy);
  return solver.value(initial_aug_state(mdp));
}

double evaluate_uniform_policy(const TabularMdp& mdp, const DelayModel& d, std::size_t budget) {
  check_pair(mdp, d);
  Solver solver(mdp, d, budget, Mode::kUniform, nullptr);
  return solver.value(initial_aug_state(mdp));
}

std::size_t dump_aug_graph(const TabularMdp& mdp, const DelayModel& d, std::ostream& out,
                           std::size_t budget) {
  check_pair(mdp, d);
  const AugIndexer indexer = make_indexer(mdp, d);
  absl::flat_hash_map<std::uint64_t, bool> seen;
  std::deque<AugState> frontier{initial_aug_state(mdp)};
  seen.emplace(indexer.key(frontier.front()), true);
  auto state_json = [](const AugState& st) {
    return nlohmann::json{{"s", st.s},
                          {"queue", st.queue.to_vector()},
                          {"tag", st.is_tran() ? nlohmann::json("tran") : nlohmann::json(st.tag)},
                          {"h", st.h}};
  };
  while (!frontier.empty()) {
    const AugState st = frontier.front();
    frontier.pop_front();
    nlohmann::json outcomes = nlohmann::json::array();
    auto visit = [&](std::optional<int> action) {
      for (const auto& o : aug_successors(mdp, d, st, action)) {
        outcomes.push_back({{"action", action ? nlohmann::json(*action) : nlohmann::json(nullptr)},
                            {"next", indexer.key(o.next)},
                            {"p", o.probability},
                            {"r", o.reward}});
        if (seen.emplace(indexer.key(o.next), true).second) {
          if (seen.size() > budget) {
            throw ResourceError("reachable augmented states exceed budget", seen.size());
          }
          frontier.push_back(o.next);
        }
      }
    };
    if (st.is_decision() && st.h <= mdp.horizon()) {
      for (int a = 0; a < mdp.num_actions(); ++a) visit(a);
    } else if (!is_terminal(st, mdp.horizon())) {
      visit(std::nullopt);
    }
    out << nlohmann::json{{"key", indexer.key(st)}, {"state", state_json(st)}, {"outcomes", outcomes}}.dump()
        << '\n';
  }
  return seen.size();
}

}  // namespace sdmdp
