#pragma once

#include "sdmdp/core/categorical.hpp"

#include "json.hpp"

#include <span>
#include <vector>

namespace sdmdp {

enum class RewardRange {
  kUnit,         // r(s,a) in [0, 1]
  kNonNegative,  // r(s,a) >= 0; used by shift tests only
};

/// Finite-horizon episodic MDP with a fixed initial state and known rewards.
/// Time-homogeneous kernel; rows indexed (s, a) row-major.
class TabularMdp {
 public:
  TabularMdp(int num_states, int num_actions, int horizon, int branching_bound, int initial_state,
             std::vector<double> rewards, std::vector<Categorical> transitions,
             RewardRange range = RewardRange::kUnit);

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  int horizon() const noexcept { return horizon_; }
  int branching_bound() const noexcept { return branching_bound_; }
  int initial_state() const noexcept { return initial_state_; }

  double reward(int s, int a) const { return rewards_[index(s, a)]; }
  const Categorical& transition(int s, int a) const { return transitions_[index(s, a)]; }
  std::span<const double> rewards() const noexcept { return rewards_; }
  std::span<const Categorical> transitions() const noexcept { return transitions_; }

  TabularMdp with_horizon(int horizon) const;
  /// Largest support size over all rows.
  int max_support() const;

  friend bool operator==(const TabularMdp&, const TabularMdp&) = default;

 private:
  std::size_t index(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
           static_cast<std::size_t>(a);
  }

  int num_states_;
  int num_actions_;
  int horizon_;
  int branching_bound_;
  int initial_state_;
  std::vector<double> rewards_;
  std::vector<Categorical> transitions_;
  RewardRange range_;
};

/// Deterministic step-dependent policy pi_h(s), h = 1..H.
class TimedPolicy {
 public:
  TimedPolicy(int horizon, int num_states, std::vector<int> actions);
  static TimedPolicy constant(int horizon, int num_states, int action);

  int operator()(int h, int s) const;
  int horizon() const noexcept { return horizon_; }
  int num_states() const noexcept { return num_states_; }
  std::span<const int> actions() const noexcept { return actions_; }

  friend bool operator==(const TimedPolicy&, const TimedPolicy&) = default;

 private:
  int horizon_;
  int num_states_;
  std::vector<int> actions_;  // (h-1) * S + s
};

/// V_h(s) for h = 1..H+1 with V_{H+1} = 0.
class ValueTable {
 public:
  ValueTable(int horizon, int num_states);
  double operator()(int h, int s) const { return values_[offset(h, s)]; }
  double& at(int h, int s) { return values_[offset(h, s)]; }
  std::span<const double> row(int h) const {
    return std::span<const double>(values_).subspan(offset(h, 0), static_cast<std::size_t>(num_states_));
  }
  int horizon() const noexcept { return horizon_; }
  int num_states() const noexcept { return num_states_; }

 private:
  std::size_t offset(int h, int s) const {
    return static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(num_states_) +
           static_cast<std::size_t>(s);
  }
  int horizon_;
  int num_states_;
  std::vector<double> values_;
};

struct OptimalSolution {
  ValueTable values;
  TimedPolicy policy;
};

/// Backward recursion V_h(s) = r(s, pi_h(s)) + P V_{h+1}.
ValueTable evaluate_policy(const TabularMdp& mdp, const TimedPolicy& policy);

/// Bellman optimality backup; greedy ties go to the lowest action index.
OptimalSolution optimal_value(const TabularMdp& mdp);

void to_json(nlohmann::json& j, const TabularMdp& mdp);
TabularMdp mdp_from_json(const nlohmann::json& j);

}  // namespace sdmdp
