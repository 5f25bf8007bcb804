#pragma once

#include "sdmdp/core/categorical.hpp"
#include "sdmdp/core/tabular_mdp.hpp"
#include "sdmdp/pkd/estimator.hpp"
#include "sdmdp/pkd/planner.hpp"
#include "sdmdp/pkd/regret_trace.hpp"

#include <functional>
#include <vector>

namespace sdmdp {

/// Partially known dynamics over S = X x Y with state index s = x * |Y| + y:
/// the Y-marginal is known, the X-conditional is learned per feature z.
struct FlatPkdSpec {
  int num_x = 1;
  int num_y = 1;
  int num_actions = 1;
  int horizon = 1;
  int initial_state = 0;
  std::vector<double> rewards;   // (s, a) row-major
  std::vector<Categorical> p_y;  // (s, a) -> distribution over Y
  std::function<std::uint64_t(int s, int a, int y)> feature;
  std::function<double(std::uint64_t z)> ell;

  int num_states() const noexcept { return num_x * num_y; }
  double reward(int s, int a) const { return rewards[static_cast<std::size_t>(s * num_actions + a)]; }
  const Categorical& y_kernel(int s, int a) const { return p_y[static_cast<std::size_t>(s * num_actions + a)]; }
};

/// Singleton Y with identity features z = s * A + a and a constant log term:
/// the planner then is plain MVP value iteration.
FlatPkdSpec plain_mvp_spec(const TabularMdp& mdp, double ell);

/// Factored spec whose Y-kernel is the exact marginal of `mdp`.
FlatPkdSpec factored_spec(const TabularMdp& mdp, int num_y,
                          std::function<std::uint64_t(int s, int a, int y)> feature,
                          std::function<double(std::uint64_t z)> ell);

class FlatPkdModel {
 public:
  struct State {
    int s = 0;
    int h = 1;
  };
  struct Context {
    int y = 0;
    int h = 1;
  };

  explicit FlatPkdModel(const FlatPkdSpec& spec) : spec_(spec) {}

  std::uint64_t key(const State& st) const noexcept {
    return static_cast<std::uint64_t>(st.h - 1) * static_cast<std::uint64_t>(spec_.num_states()) +
           static_cast<std::uint64_t>(st.s);
  }
  std::uint64_t key_space() const noexcept {
    return static_cast<std::uint64_t>(spec_.horizon + 1) * static_cast<std::uint64_t>(spec_.num_states());
  }
  int num_actions(const State& st) const noexcept { return st.h > spec_.horizon ? 0 : spec_.num_actions; }
  bool is_decision(const State&) const noexcept { return true; }
  double value_cap() const noexcept { return spec_.horizon; }

  template <class Known, class Learned>
  void for_each_branch(const State& st, int a, Known&&, Learned&& learned) const {
    const auto& py = spec_.y_kernel(st.s, a);
    const double r = spec_.reward(st.s, a);
    for (int y : py.support()) {
      const std::uint64_t z = spec_.feature(st.s, a, y);
      learned(py[y], r, z, spec_.ell(z), Context{y, st.h + 1});
    }
  }
  State compose(const Context& ctx, std::int64_t x) const noexcept {
    return State{static_cast<int>(x) * spec_.num_y + ctx.y, ctx.h};
  }

  const FlatPkdSpec& spec() const noexcept { return spec_; }

 private:
  const FlatPkdSpec& spec_;
};

using FlatPlanner = Planner<FlatPkdModel, EffEstimator>;

/// Full value table V_h(s), h = 1..H+1, and greedy policy of a planner.
ValueTable planned_values(FlatPlanner& planner, const FlatPkdSpec& spec);
TimedPolicy planned_policy(FlatPlanner& planner, const FlatPkdSpec& spec);

/// Feeds the transitions of one episode (states s_1..s_{H+1}, actions) into
/// the estimator. Throws ValidationError at the first transition whose Y
/// component has zero known probability.
void update_flat(EffEstimator& est, const FlatPkdSpec& spec, const std::vector<int>& states,
                 const std::vector<int>& actions);

/// Plan, execute in `mdp`, update; K episodes. The environment is the
/// undelayed simulator with seeds (opts.seed, 0, k).
RegretTrace run_flat_pkd(const FlatPkdSpec& spec, const TabularMdp& mdp, const RunOptions& opts);

}  // namespace sdmdp
