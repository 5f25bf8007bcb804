#pragma once

#include "sdmdp/augmented/aug_state.hpp"
#include "sdmdp/core/tabular_mdp.hpp"
#include "sdmdp/delay/delay_model.hpp"
#include "sdmdp/delay/delayed_env.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sdmdp {

inline constexpr std::size_t kDefaultAugBudget = 10'000'000;

/// Side information for a reveal query. Built by reveal_flags(); the guards
/// mirror the exception cases of the reveal probability.
struct RevealFlags {
  bool queue_full = false;      // len(a) = D_max + 1 after appending
  bool horizon_end = false;     // the query is made at step H + 1
  bool queue_empty = false;     // nothing left to reveal
  bool fresh_draw = false;      // D_{t-1} = 0, so Delta = -1 is clipped up to 0
  bool constant_first = false;  // fast constant mode, pending state is s_2
};

enum class RevealKind { kForced, kNever, kConstantFirst, kFresh, kRegular };

/// queue is the queue after the transition (with the new action appended for
/// decision states); step is the step index after the transition.
RevealFlags reveal_flags(const DelayModel& d, int horizon, const ActionQueue& queue, int delta_tilde,
                         int step);
RevealKind reveal_kind(const RevealFlags& f, int delta_tilde, int delta_max);

/// Probability that the pending state is revealed now given that it has not
/// been revealed for delta_tilde steps. Throws UnreachableError when the
/// conditioning event has zero probability and no flag decides the answer.
double p_tran(const DelayModel& d, int s, int a, int delta_tilde, const RevealFlags& flags = {});

struct AugOutcome {
  AugState next;
  double probability = 0.0;
  double reward = 0.0;
};

/// Initial augmented state (s_1, empty, 0, 1).
AugState initial_aug_state(const TabularMdp& mdp);
/// The augmented state the agent is in at an observation.
AugState aug_state_of(const DelayedObservation& obs, int num_actions);
bool is_terminal(const AugState& st, int horizon);

/// Successor distribution; zero-probability branches are omitted. Decision
/// states need an action, intermediate states must not get one. Terminal
/// states (decision states at h = H + 1, empty -1 states at H + 1) return {}.
std::vector<AugOutcome> aug_successors(const TabularMdp& mdp, const DelayModel& d,
                                       const AugState& st, std::optional<int> action = std::nullopt);

using DelayedPolicy = std::function<int(const AugState&)>;

/// Deterministic decision map over augmented decision states.
class DecisionMap {
 public:
  DecisionMap(AugIndexer indexer) : indexer_(std::move(indexer)), actions_() {}
  /// -1 when the state is not in the map.
  int action(const AugState& st) const;
  void set(const AugState& st, int action) { actions_.insert_or_assign(indexer_.key(st), action); }
  std::size_t size() const noexcept { return actions_.size(); }
  const AugIndexer& indexer() const noexcept { return indexer_; }
  DelayedPolicy as_policy() const;

 private:
  AugIndexer indexer_;
  absl::flat_hash_map<std::uint64_t, int> actions_;
};

struct DelayedOptimum {
  double value = 0.0;
  DecisionMap policy;
  std::size_t reachable = 0;
};

AugIndexer make_indexer(const TabularMdp& mdp, const DelayModel& d);

/// Optimal value over delayed policies by memoized recursion over the
/// reachable augmented states. Ties go to the lowest action index.
DelayedOptimum optimal_delayed_value(const TabularMdp& mdp, const DelayModel& d,
                                     std::size_t budget = kDefaultAugBudget);

/// Exact expected return of a delayed policy. Throws ValidationError naming
/// the state if the policy returns an invalid action at a reachable state.
double evaluate_delayed_policy(const TabularMdp& mdp, const DelayModel& d, const DelayedPolicy& policy,
                               std::size_t budget = kDefaultAugBudget);

/// Exact expected return of the policy that picks uniformly at random.
double evaluate_uniform_policy(const TabularMdp& mdp, const DelayModel& d,
                               std::size_t budget = kDefaultAugBudget);

/// Writes one JSON object per reachable augmented state:
/// {"key", "state", "outcomes": [{"action", "next", "p", "r"}]}.
std::size_t dump_aug_graph(const TabularMdp& mdp, const DelayModel& d, std::ostream& out,
                           std::size_t budget = kDefaultAugBudget);

}  // namespace sdmdp
