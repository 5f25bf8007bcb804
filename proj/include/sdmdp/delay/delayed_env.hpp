#pragma once

#include "sdmdp/core/rng.hpp"
#include "sdmdp/core/tabular_mdp.hpp"
#include "sdmdp/delay/delay_model.hpp"

#include "json.hpp"

#include <utility>
#include <vector>

namespace sdmdp {

/// What the agent sees at the start of step h: the last revealed state, the
/// unresolved actions (a_{t_h}, ..., a_{h-1}) and the steps elapsed since
/// that reveal.
struct DelayedObservation {
  int last_state = 0;
  std::vector<int> queue;
  int delta_tilde = 0;
  int step = 1;
  /// (state, its true time index) revealed at this step, in order.
  std::vector<std::pair<int, int>> newly_revealed;
  bool done = false;
};

/// Complete record of one episode, available once the horizon is reached.
/// Index conventions: states[t-1] = s_t for t = 1..H+1, actions[h-1] = a_h,
/// deltas[h-1] = Delta_h, delays[h] = D_h for h = 0..H, reveal_steps[t-1] is
/// the step at which s_t is revealed (> H means after the episode).
struct EpisodeLog {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<int> deltas;
  std::vector<int> delays;
  std::vector<double> rewards;
  std::vector<int> reveal_steps;

  double total_reward() const;
};

void to_json(nlohmann::json& j, const EpisodeLog& log);

/// Stochastic-delay episodic simulator. Holds references to the instance,
/// which must outlive the environment. Single-threaded.
class DelayedEnv {
 public:
  DelayedEnv(const TabularMdp& mdp, const DelayModel& delay);

  /// Starts an episode; transition and inter-arrival draws come from
  /// separate streams derived from `seed`.
  const DelayedObservation& reset(const SeedSpec& seed);
  const DelayedObservation& step(int action);
  /// Replays a step with a prescribed successor and inter-arrival.
  const DelayedObservation& step_with(int action, int next_state, int interarrival);
  EpisodeLog finish_episode() const;

  const DelayedObservation& observation() const noexcept { return obs_; }
  int step_index() const noexcept { return h_; }
  bool done() const noexcept { return h_ > mdp_->horizon(); }
  double accrued_reward() const noexcept { return accrued_; }
  const TabularMdp& mdp() const noexcept { return *mdp_; }
  const DelayModel& delay() const noexcept { return *delay_; }

 private:
  void advance(int action, int next_state, int interarrival);
  void refresh_observation();

  const TabularMdp* mdp_;
  const DelayModel* delay_;
  CounterRng transition_rng_{0};
  CounterRng delay_rng_{0};
  bool started_ = false;
  int h_ = 1;
  int last_revealed_ = 1;  // t_h
  double accrued_ = 0.0;
  EpisodeLog log_;
  DelayedObservation obs_;
};

enum class CdmdpMode {
  kStrict,  // auxiliary start state with inter-arrival D, horizon H+1
  kFast,    // original instance, constant_mode = D
};

struct DelayedInstance {
  TabularMdp mdp;
  DelayModel delay;
};

/// Constant-delay reduction. Throws ValidationError if delay > d_max.
DelayedInstance make_cdmdp(const TabularMdp& mdp, int delay, CdmdpMode mode, int d_max);
inline DelayedInstance make_cdmdp(const TabularMdp& mdp, int delay, CdmdpMode mode) {
  return make_cdmdp(mdp, delay, mode, delay);
}

}  // namespace sdmdp
