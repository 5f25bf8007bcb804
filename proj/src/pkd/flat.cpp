#include "sdmdp/pkd/flat.hpp"

#include "sdmdp/core/errors.hpp"
#include "sdmdp/delay/delayed_env.hpp"

#include <memory>
#include <string>

namespace sdmdp {

FlatPkdSpec plain_mvp_spec(const TabularMdp& mdp, double ell) {
  FlatPkdSpec spec;
  spec.num_x = mdp.num_states();
  spec.num_y = 1;
  spec.num_actions = mdp.num_actions();
  spec.horizon = mdp.horizon();
  spec.initial_state = mdp.initial_state();
  spec.rewards.assign(mdp.rewards().begin(), mdp.rewards().end());
  spec.p_y.assign(static_cast<std::size_t>(mdp.num_states() * mdp.num_actions()), Categorical::point_mass(1, 0));
  const int A = mdp.num_actions();
  spec.feature = [A](int s, int a, int) { return static_cast<std::uint64_t>(s * A + a); };
  spec.ell = [ell](std::uint64_t) { return ell; };
  return spec;
}

FlatPkdSpec factored_spec(const TabularMdp& mdp, int num_y,
                          std::function<std::uint64_t(int s, int a, int y)> feature,
                          std::function<double(std::uint64_t z)> ell) {
  if (num_y <= 0 || mdp.num_states() % num_y != 0) {
    throw ValidationError("|Y| must divide the number of states");
  }
  FlatPkdSpec spec;
  spec.num_x = mdp.num_states() / num_y;
  spec.num_y = num_y;
  spec.num_actions = mdp.num_actions();
  spec.horizon = mdp.horizon();
  spec.initial_state = mdp.initial_state();
  spec.rewards.assign(mdp.rewards().begin(), mdp.rewards().end());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      std::vector<double> marginal(static_cast<std::size_t>(num_y), 0.0);
      const auto& row = mdp.transition(s, a);
      for (int s2 : row.support()) marginal[static_cast<std::size_t>(s2 % num_y)] += row[s2];
      spec.p_y.push_back(Categorical::normalized(std::move(marginal)));
    }
  }
  spec.feature = std::move(feature);
  spec.ell = std::move(ell);
  return spec;
}

ValueTable planned_values(FlatPlanner& planner, const FlatPkdSpec& spec) {
  ValueTable v(spec.horizon, spec.num_states());
  for (int h = 1; h <= spec.horizon; ++h)
    for (int s = 0; s < spec.num_states(); ++s) v.at(h, s) = planner.value({s, h});
  return v;
}

TimedPolicy planned_policy(FlatPlanner& planner, const FlatPkdSpec& spec) {
  std::vector<int> actions;
  actions.reserve(static_cast<std::size_t>(spec.horizon * spec.num_states()));
  for (int h = 1; h <= spec.horizon; ++h)
    for (int s = 0; s < spec.num_states(); ++s) actions.push_back(planner.greedy({s, h}));
  return TimedPolicy(spec.horizon, spec.num_states(), std::move(actions));
}

void update_flat(EffEstimator& est, const FlatPkdSpec& spec, const std::vector<int>& states,
                 const std::vector<int>& actions) {
  for (std::size_t h = 0; h < actions.size(); ++h) {
    const int s = states[h];
    const int a = actions[h];
    const int next = states[h + 1];
    const int y = next % spec.num_y;
    if (spec.y_kernel(s, a)[y] <= 0.0) {
      throw ValidationError("transition at step " + std::to_string(h + 1) + " lands on y = " +
                            std::to_string(y) + ", which the known Y-kernel excludes");
    }
    est.add(spec.feature(s, a, y), next / spec.num_y);
  }
}

RegretTrace run_flat_pkd(const FlatPkdSpec& spec, const TabularMdp& mdp, const RunOptions& opts) {
  if (spec.num_states() != mdp.num_states() || spec.num_actions != mdp.num_actions() ||
      spec.horizon != mdp.horizon()) {
    throw ValidationError("spec and environment dimensions differ");
  }
  const OptimalSolution opt = optimal_value(mdp);
  RegretTrace trace(opt.values(1, mdp.initial_state()));
  const DelayModel no_delay = DelayModel::zero_delay(mdp.num_states(), mdp.num_actions());
  DelayedEnv env(mdp, no_delay);
  const FlatPkdModel model(spec);
  EffEstimator est;
  std::unique_ptr<FlatPlanner> planner;
  std::uint64_t planned_revision = 0;
  std::optional<double> policy_value;
  for (int k = 1; k <= opts.episodes; ++k) {
    const bool replan = !planner || opts.replan == ReplanSchedule::kEveryEpisode ||
                        est.revision() != planned_revision;
    if (replan) {
      planner = std::make_unique<FlatPlanner>(model, est, opts.budget);
      planned_revision = est.revision();
      policy_value.reset();
    }
    const double estimate = planner->value({spec.initial_state, 1});
    std::optional<double> exact;
    const bool oracle = opts.oracle_stride > 0 && (k == 1 || k % opts.oracle_stride == 0);
    if (oracle || (opts.oracle_stride > 0 && opts.replan == ReplanSchedule::kDoubling && replan)) {
      if (!policy_value) {
        policy_value = evaluate_policy(mdp, planned_policy(*planner, spec))(1, mdp.initial_state());
      }
      exact = policy_value;
    }
    const auto* obs = &env.reset(SeedSpec{opts.seed, 0, static_cast<std::uint64_t>(k)});
    while (!obs->done) obs = &env.step(planner->greedy({obs->last_state, obs->step}));
    const EpisodeLog log = env.finish_episode();
    update_flat(est, spec, log.states, log.actions);
    trace.add(k, estimate, log.total_reward(), exact, opts.seed);
  }
  return trace;
}

}  // namespace sdmdp
