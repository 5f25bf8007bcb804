#include "sdmdp/delayed/mvp_delayed.hpp"

#include "sdmdp/core/errors.hpp"
#include "sdmdp/core/rng.hpp"
#include "sdmdp/pkd/mvp_est.hpp"

#include <array>
#include <cmath>
#include <memory>

namespace sdmdp {

DelayedAlgorithm delayed_algorithm_from_string(const std::string& s) {
  if (s == "mvp_delayed_known" || s == "known") return DelayedAlgorithm::kKnown;
  if (s == "mvp_delayed_unknown" || s == "unknown") return DelayedAlgorithm::kUnknown;
  if (s == "pkd_generic") return DelayedAlgorithm::kPkdGeneric;
  throw ValidationError("unknown algorithm '" + s + "'");
}

std::string to_string(DelayedAlgorithm a) {
  switch (a) {
    case DelayedAlgorithm::kKnown: return "mvp_delayed_known";
    case DelayedAlgorithm::kUnknown: return "mvp_delayed_unknown";
    case DelayedAlgorithm::kPkdGeneric: return "pkd_generic";
  }
  return "?";
}

double q_estimate(const DelayModel& d, int horizon, const RevealQuery& q, double v_tran, double v_delay,
                  const DelayedEstimator& est, DelayKnowledge mode, double ell) {
  const RevealFlags flags = reveal_flags(d, horizon, q.queue, q.delta_tilde, q.step);
  const RevealKind kind = reveal_kind(flags, q.delta_tilde, d.delta_max());
  if (kind == RevealKind::kForced) return v_tran;
  if (kind == RevealKind::kNever) return v_delay;
  const int a1 = q.queue.front();
  if (mode == DelayKnowledge::kKnown || kind == RevealKind::kConstantFirst) {
    const double p = p_tran(d, q.s, a1, q.delta_tilde, flags);
    return p * v_tran + (1.0 - p) * v_delay;
  }
  const auto& f = est.features();
  const std::uint64_t z = kind == RevealKind::kFresh ? f.id(DelayFeatureKind::kFresh, q.s, a1, 0)
                                                     : f.id(DelayFeatureKind::kReveal, q.s, a1, q.delta_tilde);
  const EffView view = est.lookup(z);
  std::array<double, 2> values{};
  for (std::size_t i = 0; i < view.outcomes.size(); ++i) values[i] = view.outcomes[i] == 0 ? v_tran : v_delay;
  return mvp_est(0.0, view.probs, std::span<const double>(values.data(), view.outcomes.size()), view.count, ell,
                 horizon);
}

EllTable generic_ell_table(const TabularMdp& mdp, const DelayModel& d, double episodes, double delta) {
  double queues = 0.0;
  double power = 1.0;
  for (int D = 0; D <= d.d_max(); ++D, power *= mdp.num_actions()) queues += power;
  const double num_y = queues * (mdp.horizon() + 1);
  const double num_z = static_cast<double>(mdp.num_states()) * mdp.num_actions() * (d.delta_max() + 4);
  const double succ = ell_star_generic(num_y, num_z, mdp.horizon(), episodes, delta, mdp.branching_bound());
  const double rev = ell_star_generic(num_y, num_z, mdp.horizon(), episodes, delta, 2.0);
  const auto n = static_cast<std::size_t>(d.d_max() + 2);
  return EllTable{std::vector<double>(n, succ), std::vector<double>(n, rev)};
}

namespace {

double optimal_for(const TabularMdp& mdp, const DelayModel& d, const RunOptions& opts) {
  if (opts.optimal_value) return *opts.optimal_value;
  return optimal_delayed_value(mdp, d, opts.budget).value;
}

bool oracle_due(const RunOptions& opts, int k) {
  return opts.oracle_stride > 0 && (k == 1 || k % opts.oracle_stride == 0);
}

template <class Estimator, class Update>
RegretTrace run_learner(const TabularMdp& mdp, const DelayModel& d, const AugPkdModel& model, Estimator& est,
                        Update&& update, const RunOptions& opts, const SnapshotHook& hook) {
  using P = Planner<AugPkdModel, Estimator>;
  RegretTrace trace(optimal_for(mdp, d, opts));
  DelayedEnv env(mdp, d);
  const AugState start = initial_aug_state(mdp);
  std::unique_ptr<P> planner;
  std::uint64_t planned_revision = 0;
  std::optional<double> policy_value;
  for (int k = 1; k <= opts.episodes; ++k) {
    const bool replan = !planner || opts.replan == ReplanSchedule::kEveryEpisode ||
                        est.revision() != planned_revision;
    if (replan) {
      planner = std::make_unique<P>(model, est, opts.budget);
      planned_revision = est.revision();
      policy_value.reset();
    }
    const double estimate = planner->value(start);
    std::optional<double> exact;
    if (oracle_due(opts, k) || (opts.oracle_stride > 0 && opts.replan == ReplanSchedule::kDoubling && replan)) {
      if (!policy_value) {
        policy_value = evaluate_delayed_policy(
            mdp, d, [&](const AugState& st) { return planner->greedy(st); }, opts.budget);
      }
      exact = policy_value;
    }
    const auto* obs = &env.reset(SeedSpec{opts.seed, 0, static_cast<std::uint64_t>(k)});
    while (!obs->done) obs = &env.step(planner->greedy(aug_state_of(*obs, mdp.num_actions())));
    const EpisodeLog log = env.finish_episode();
    update(log);
    trace.add(k, estimate, log.total_reward(), exact, opts.seed);
    if (hook.every > 0 && hook.write && k % hook.every == 0) hook.write(k, est.snapshot());
  }
  return trace;
}

}  // namespace

RegretTrace run_mvp_delayed(const TabularMdp& mdp, const DelayModel& d, DelayedAlgorithm algorithm,
                            const RunOptions& opts, const SnapshotHook& hook) {
  if (opts.episodes < 1) throw ValidationError("episodes must be >= 1");
  if (algorithm == DelayedAlgorithm::kKnown && !d.known()) {
    throw ValidationError("mvp_delayed_known needs a delay model marked as known");
  }
  const double K = opts.episodes;
  if (algorithm == DelayedAlgorithm::kPkdGeneric) {
    const AugPkdModel model(mdp, d, DelayKnowledge::kUnknown, generic_ell_table(mdp, d, K, opts.delta));
    EffEstimator est;
    auto update = [&](const EpisodeLog& log) {
      model.replay(log, [&](std::uint64_t z, std::int64_t x) { est.add(z, x); });
    };
    return run_learner(mdp, d, model, est, update, opts, hook);
  }
  const bool known = algorithm == DelayedAlgorithm::kKnown;
  const AugPkdModel model(mdp, d, known ? DelayKnowledge::kKnown : DelayKnowledge::kUnknown,
                          delayed_ell_table(mdp, d, K, opts.delta));
  DelayedEstimator est(mdp.num_states(), mdp.num_actions(), d.delta_max(), !known);
  auto update = [&](const EpisodeLog& log) { est.update_from_log(log); };
  return run_learner(mdp, d, model, est, update, opts, hook);
}

RegretTrace run_random_policy(const TabularMdp& mdp, const DelayModel& d, const RunOptions& opts) {
  if (opts.episodes < 1) throw ValidationError("episodes must be >= 1");
  RegretTrace trace(optimal_for(mdp, d, opts));
  const double uniform = evaluate_uniform_policy(mdp, d, opts.budget);
  DelayedEnv env(mdp, d);
  const auto A = static_cast<std::uint64_t>(mdp.num_actions());
  for (int k = 1; k <= opts.episodes; ++k) {
    const SeedSpec seed{opts.seed, 0, static_cast<std::uint64_t>(k)};
    CounterRng policy_rng(seed.with_purpose(StreamPurpose::kPolicy));
    const auto* obs = &env.reset(seed);
    while (!obs->done) obs = &env.step(static_cast<int>(policy_rng.below(A)));
    const EpisodeLog log = env.finish_episode();
    std::optional<double> exact;
    if (oracle_due(opts, k)) exact = uniform;
    trace.add(k, uniform, log.total_reward(), exact, opts.seed);
  }
  return trace;
}

}  // namespace sdmdp
