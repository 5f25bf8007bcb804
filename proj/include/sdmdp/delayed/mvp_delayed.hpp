#pragma once

#include "sdmdp/delayed/aug_pkd_model.hpp"
#include "sdmdp/delayed/delayed_estimator.hpp"
#include "sdmdp/pkd/estimator.hpp"
#include "sdmdp/pkd/planner.hpp"
#include "sdmdp/pkd/regret_trace.hpp"

#include "json.hpp"

#include <functional>
#include <string>

namespace sdmdp {

enum class DelayedAlgorithm {
  kKnown,       // MVP-Delayed with the true delay distribution
  kUnknown,     // MVP-Delayed learning reveal probabilities from counts
  kPkdGeneric,  // generic partially-known-dynamics learner on the same features
};

DelayedAlgorithm delayed_algorithm_from_string(const std::string& s);
std::string to_string(DelayedAlgorithm a);

using DelayedPlanner = Planner<AugPkdModel, DelayedEstimator>;
using GenericDelayedPlanner = Planner<AugPkdModel, EffEstimator>;

/// A reveal query: the pending state of (s, queue.front()) has waited
/// delta_tilde steps; queue and step are taken after the transition.
struct RevealQuery {
  int s = 0;
  ActionQueue queue;
  int delta_tilde = 0;
  int step = 1;
};

/// Optimistic value of a reveal query given the values of its two outcomes.
/// Forced reveals return v_tran, known mode mixes with the true P_tran, unknown
/// mode applies MVP-Est to the empirical reveal split.
double q_estimate(const DelayModel& d, int horizon, const RevealQuery& q, double v_tran, double v_delay,
                  const DelayedEstimator& est, DelayKnowledge mode, double ell);

/// Log terms of the generic learner: the Algorithm-5 form with
/// |Y| = (sum_{D <= D_max} A^D)(H + 1) and |Z| = S A (delta_max + 4).
EllTable generic_ell_table(const TabularMdp& mdp, const DelayModel& d, double episodes, double delta);

/// Called every `every` episodes (after the update) with the estimator snapshot.
struct SnapshotHook {
  int every = 0;
  std::function<void(int episode, const nlohmann::json& snapshot)> write;
};

/// Plan, record the exact value of the greedy policy (per the oracle stride),
/// execute in the delayed simulator with seeds (opts.seed, 0, k), update.
/// kKnown requires d.known(). The optimal value comes from the augmented DP
/// unless opts.optimal_value is given.
RegretTrace run_mvp_delayed(const TabularMdp& mdp, const DelayModel& d, DelayedAlgorithm algorithm,
                            const RunOptions& opts, const SnapshotHook& hook = {});

/// Uniformly random actions (policy stream of (opts.seed, 0, k)). The
/// estimate and exact columns hold the exact value of the uniform policy.
RegretTrace run_random_policy(const TabularMdp& mdp, const DelayModel& d, const RunOptions& opts);

}  // namespace sdmdp
