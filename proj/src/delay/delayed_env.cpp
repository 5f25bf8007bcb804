#include "sdmdp/delay/delayed_env.hpp"

#include "sdmdp/core/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace sdmdp {

double EpisodeLog::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

void to_json(nlohmann::json& j, const EpisodeLog& log) {
  j = nlohmann::json{{"states", log.states},   {"actions", log.actions},
                     {"deltas", log.deltas},   {"delays", log.delays},
                     {"rewards", log.rewards}, {"reveal_steps", log.reveal_steps}};
}

DelayedEnv::DelayedEnv(const TabularMdp& mdp, const DelayModel& delay)
    : mdp_(&mdp), delay_(&delay) {
  if (delay.num_states() != mdp.num_states() || delay.num_actions() != mdp.num_actions()) {
    throw ValidationError("delay model dimensions do not match the MDP");
  }
}

const DelayedObservation& DelayedEnv::reset(const SeedSpec& seed) {
  transition_rng_ = CounterRng(seed.with_purpose(StreamPurpose::kTransition));
  delay_rng_ = CounterRng(seed.with_purpose(StreamPurpose::kDelay));
  started_ = true;
  h_ = 1;
  last_revealed_ = 1;
  accrued_ = 0.0;
  log_ = EpisodeLog{};
  const int H = mdp_->horizon();
  log_.states.reserve(static_cast<std::size_t>(H + 1));
  log_.states.push_back(mdp_->initial_state());
  log_.delays.push_back(delay_->constant_mode().value_or(0));
  log_.reveal_steps.push_back(1);
  refresh_observation();
  obs_.newly_revealed = {{mdp_->initial_state(), 1}};
  return obs_;
}

const DelayedObservation& DelayedEnv::step(int action) {
  if (!started_) throw EpisodeError("step() before reset()");
  if (done()) throw EpisodeError("episode already finished at h = H + 1");
  if (action < 0 || action >= mdp_->num_actions()) {
    throw ValidationError("action " + std::to_string(action) + " out of range");
  }
  const int s = log_.states.back();
  const auto counter = static_cast<std::uint64_t>(h_);
  const int next = mdp_->transition(s, action).sample(transition_rng_.uniform_at(counter));
  const int interarrival = delay_->sample(s, action, delay_rng_.uniform_at(counter));
  advance(action, next, interarrival);
  return obs_;
}

const DelayedObservation& DelayedEnv::step_with(int action, int next_state, int interarrival) {
  if (!started_) throw EpisodeError("step_with() before reset()");
  if (done()) throw EpisodeError("episode already finished at h = H + 1");
  if (action < 0 || action >= mdp_->num_actions()) throw ValidationError("action out of range");
  const int s = log_.states.back();
  if (next_state < 0 || next_state >= mdp_->num_states() ||
      mdp_->transition(s, action)[next_state] <= 0.0) {
    throw ValidationError("replayed successor has zero probability");
  }
  if (delay_->prob(s, action, interarrival) <= 0.0) {
    throw ValidationError("replayed inter-arrival has zero probability");
  }
  advance(action, next_state, interarrival);
  return obs_;
}

void DelayedEnv::advance(int action, int next_state, int interarrival) {
  const int s = log_.states.back();
  const double r = mdp_->reward(s, action);
  accrued_ += r;
  log_.actions.push_back(action);
  log_.rewards.push_back(r);
  log_.deltas.push_back(interarrival);
  const int d = std::clamp(log_.delays.back() + interarrival, 0, delay_->d_max());
  log_.delays.push_back(d);
  log_.states.push_back(next_state);
  log_.reveal_steps.push_back(h_ + 1 + d);  // reveal step of s_{h+1}
  ++h_;

  obs_.newly_revealed.clear();
  if (!done()) {
    // Chain reveals: s_{t+1} may share the step with s_t when Delta_t = -1.
    const int known = static_cast<int>(log_.states.size());
    while (last_revealed_ < known && log_.reveal_steps[static_cast<std::size_t>(last_revealed_)] <= h_) {
      ++last_revealed_;
      obs_.newly_revealed.emplace_back(log_.states[static_cast<std::size_t>(last_revealed_ - 1)],
                                       last_revealed_);
    }
  }
  auto revealed = std::move(obs_.newly_revealed);
  refresh_observation();
  obs_.newly_revealed = std::move(revealed);
}

void DelayedEnv::refresh_observation() {
  const auto t = static_cast<std::size_t>(last_revealed_);
  obs_.last_state = log_.states[t - 1];
  obs_.queue.assign(log_.actions.begin() + static_cast<std::ptrdiff_t>(t - 1), log_.actions.end());
  obs_.delta_tilde = h_ - log_.reveal_steps[t - 1];
  obs_.step = h_;
  obs_.done = done();
}

EpisodeLog DelayedEnv::finish_episode() const {
  if (!started_ || !done()) {
    throw EpisodeError("finish_episode() called at h = " + std::to_string(h_) +
                       " before the horizon was reached");
  }
  return log_;
}

DelayedInstance make_cdmdp(const TabularMdp& mdp, int delay, CdmdpMode mode, int d_max) {
  if (delay < 0) throw ValidationError("constant delay must be non-negative");
  if (delay > d_max) {
    throw ValidationError("constant delay " + std::to_string(delay) + " exceeds D_max = " +
                          std::to_string(d_max));
  }
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  if (mode == CdmdpMode::kFast) {
    if (delay == 0) {
      std::vector<Categorical> rows(static_cast<std::size_t>(S * A), Categorical::point_mass(2, 1));
      return {mdp, DelayModel(S, A, 0, d_max, true, std::move(rows))};
    }
    std::vector<Categorical> rows(static_cast<std::size_t>(S * A),
                                  Categorical::point_mass(delay + 2, 1));
    return {mdp, DelayModel(S, A, delay, d_max, true, std::move(rows), delay)};
  }

  // Strict: state S is the auxiliary start; every action moves it to s_1 with
  // inter-arrival `delay`.
  const int start = S;
  std::vector<double> rewards;
  std::vector<Categorical> transitions;
  std::vector<Categorical> delays;
  for (int s = 0; s <= S; ++s) {
    for (int a = 0; a < A; ++a) {
      if (s == start) {
        rewards.push_back(0.0);
        transitions.push_back(Categorical::point_mass(S + 1, mdp.initial_state()));
        delays.push_back(Categorical::point_mass(delay + 2, delay + 1));
      } else {
        rewards.push_back(mdp.reward(s, a));
        auto p = mdp.transition(s, a).probabilities();
        std::vector<double> widened(p.begin(), p.end());
        widened.push_back(0.0);
        transitions.push_back(Categorical::from_probabilities(std::move(widened)));
        delays.push_back(Categorical::point_mass(delay + 2, 1));
      }
    }
  }
  TabularMdp strict(S + 1, A, mdp.horizon() + 1, mdp.branching_bound(), start, std::move(rewards),
                    std::move(transitions));
  return {std::move(strict), DelayModel(S + 1, A, delay, d_max, true, std::move(delays))};
}

}  // namespace sdmdp
