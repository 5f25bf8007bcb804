#include "sdmdp/core/tabular_mdp.hpp"

#include "sdmdp/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdmdp {

TabularMdp::TabularMdp(int num_states, int num_actions, int horizon, int branching_bound,
                       int initial_state, std::vector<double> rewards,
                       std::vector<Categorical> transitions, RewardRange range)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      branching_bound_(branching_bound),
      initial_state_(initial_state),
      rewards_(std::move(rewards)),
      transitions_(std::move(transitions)),
      range_(range) {
  if (num_states_ <= 0 || num_actions_ <= 0 || horizon_ <= 0 || branching_bound_ <= 0) {
    throw ValidationError("S, A, H and B must be positive");
  }
  if (initial_state_ < 0 || initial_state_ >= num_states_) {
    throw ValidationError("initial state " + std::to_string(initial_state_) + " out of range");
  }
  const auto n = static_cast<std::size_t>(num_states_) * static_cast<std::size_t>(num_actions_);
  if (rewards_.size() != n) {
    throw ValidationError("reward table has " + std::to_string(rewards_.size()) +
                          " entries, expected S*A = " + std::to_string(n));
  }
  if (transitions_.size() != n) {
    throw ValidationError("transition table has " + std::to_string(transitions_.size()) +
                          " rows, expected S*A = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rewards_[i];
    const bool ok = std::isfinite(r) && r >= 0.0 && (range_ == RewardRange::kNonNegative || r <= 1.0);
    if (!ok) throw ValidationError("reward " + std::to_string(r) + " outside the allowed range");
    const auto& row = transitions_[i];
    if (row.size() != num_states_) {
      throw ValidationError("transition row " + std::to_string(i) + " has wrong length");
    }
    if (row.support_size() > branching_bound_) {
      throw ValidationError("transition row " + std::to_string(i) + " has support " +
                            std::to_string(row.support_size()) + " > B = " +
                            std::to_string(branching_bound_));
    }
  }
}

TabularMdp TabularMdp::with_horizon(int horizon) const {
  return TabularMdp(num_states_, num_actions_, horizon, branching_bound_, initial_state_, rewards_,
                    transitions_, range_);
}

int TabularMdp::max_support() const {
  int best = 0;
  for (const auto& row : transitions_) best = std::max(best, row.support_size());
  return best;
}

TimedPolicy::TimedPolicy(int horizon, int num_states, std::vector<int> actions)
    : horizon_(horizon), num_states_(num_states), actions_(std::move(actions)) {
  if (actions_.size() != static_cast<std::size_t>(horizon_) * static_cast<std::size_t>(num_states_)) {
    throw ValidationError("policy table must have H*S entries");
  }
  for (int a : actions_) {
    if (a < 0) throw ValidationError("negative action in policy");
  }
}

TimedPolicy TimedPolicy::constant(int horizon, int num_states, int action) {
  return TimedPolicy(horizon, num_states,
                     std::vector<int>(static_cast<std::size_t>(horizon * num_states), action));
}

int TimedPolicy::operator()(int h, int s) const {
  return actions_[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(num_states_) +
                  static_cast<std::size_t>(s)];
}

ValueTable::ValueTable(int horizon, int num_states)
    : horizon_(horizon),
      num_states_(num_states),
      values_(static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(num_states), 0.0) {}

namespace {

void check_policy(const TabularMdp& mdp, const TimedPolicy& policy) {
  if (policy.horizon() != mdp.horizon() || policy.num_states() != mdp.num_states()) {
    throw ValidationError("policy dimensions do not match the MDP");
  }
  for (int a : policy.actions()) {
    if (a >= mdp.num_actions()) throw ValidationError("policy action out of range");
  }
}

}  // namespace

ValueTable evaluate_policy(const TabularMdp& mdp, const TimedPolicy& policy) {
  check_policy(mdp, policy);
  const int H = mdp.horizon();
  ValueTable v(H, mdp.num_states());
  for (int h = H; h >= 1; --h) {
    const auto next = v.row(h + 1);
    for (int s = 0; s < mdp.num_states(); ++s) {
      const int a = policy(h, s);
      v.at(h, s) = mdp.reward(s, a) + mdp.transition(s, a).expectation(next);
    }
  }
  return v;
}

OptimalSolution optimal_value(const TabularMdp& mdp) {
  const int H = mdp.horizon();
  const int S = mdp.num_states();
  ValueTable v(H, S);
  std::vector<int> actions(static_cast<std::size_t>(H) * static_cast<std::size_t>(S), 0);
  for (int h = H; h >= 1; --h) {
    const auto next = v.row(h + 1);
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int arg = 0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double q = mdp.reward(s, a) + mdp.transition(s, a).expectation(next);
        if (q > best) {
          best = q;
          arg = a;
        }
      }
      v.at(h, s) = best;
      actions[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(S) + static_cast<std::size_t>(s)] = arg;
    }
  }
  return {std::move(v), TimedPolicy(H, S, std::move(actions))};
}

void to_json(nlohmann::json& j, const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  nlohmann::json r = nlohmann::json::array();
  nlohmann::json p = nlohmann::json::array();
  for (int s = 0; s < S; ++s) {
    std::vector<double> rs;
    nlohmann::json ps = nlohmann::json::array();
    for (int a = 0; a < A; ++a) {
      rs.push_back(mdp.reward(s, a));
      const auto row = mdp.transition(s, a).probabilities();
      ps.push_back(std::vector<double>(row.begin(), row.end()));
    }
    r.push_back(std::move(rs));
    p.push_back(std::move(ps));
  }
  j = nlohmann::json{{"S", S},
                     {"A", A},
                     {"H", mdp.horizon()},
                     {"B", mdp.branching_bound()},
                     {"s1", mdp.initial_state()},
                     {"r", std::move(r)},
                     {"P", std::move(p)}};
}

TabularMdp mdp_from_json(const nlohmann::json& j) {
  try {
    const int S = j.at("S").get<int>();
    const int A = j.at("A").get<int>();
    const auto& r = j.at("r");
    const auto& p = j.at("P");
    if (r.size() != static_cast<std::size_t>(S) || p.size() != static_cast<std::size_t>(S)) {
      throw ValidationError("\"r\" and \"P\" must have S rows");
    }
    std::vector<double> rewards;
    std::vector<Categorical> transitions;
    for (int s = 0; s < S; ++s) {
      if (r[static_cast<std::size_t>(s)].size() != static_cast<std::size_t>(A) ||
          p[static_cast<std::size_t>(s)].size() != static_cast<std::size_t>(A)) {
        throw ValidationError("state " + std::to_string(s) + " must list A actions");
      }
      for (int a = 0; a < A; ++a) {
        rewards.push_back(r[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].get<double>());
        transitions.push_back(Categorical::from_probabilities(
            p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].get<std::vector<double>>()));
      }
    }
    return TabularMdp(S, A, j.at("H").get<int>(), j.at("B").get<int>(), j.value("s1", 0),
                      std::move(rewards), std::move(transitions));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed MDP JSON: ") + e.what());
  }
}

}  // namespace sdmdp
