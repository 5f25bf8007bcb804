#pragma once

#include "sdmdp/augmented/aug_mdp.hpp"
#include "sdmdp/core/tabular_mdp.hpp"
#include "sdmdp/delay/delay_model.hpp"
#include "sdmdp/delay/delayed_env.hpp"
#include "sdmdp/delayed/delayed_estimator.hpp"

#include <vector>

namespace sdmdp {

enum class DelayKnowledge {
  kKnown,    // reveal branches use the true delay distribution
  kUnknown,  // reveal branches are learned features
};

/// Log terms by feature family and queue length (index 0..D_max+1).
struct EllTable {
  std::vector<double> successor;
  std::vector<double> reveal;
};

/// ell*(len, B) for successor features and ell*(len, 2) for reveal features.
EllTable delayed_ell_table(const TabularMdp& mdp, const DelayModel& d, double episodes, double delta);

/// The augmented MDP as partially known dynamics. Rewards and the queue/step
/// bookkeeping are known; next states always come from the estimator; reveal
/// branches come from the estimator in unknown mode and from the delay model
/// in known mode. In unknown mode only structural fields of the delay model
/// (D_max, delta_max, constant_mode) are read.
class AugPkdModel {
 public:
  using State = AugState;
  struct Context {
    AugState base;
  };

  AugPkdModel(const TabularMdp& mdp, const DelayModel& d, DelayKnowledge knowledge, EllTable ell);

  std::uint64_t key(const State& st) const noexcept { return indexer_.key(st); }
  std::uint64_t key_space() const noexcept { return indexer_.size(); }
  int num_actions(const State& st) const noexcept {
    if (is_terminal(st, H_)) return 0;
    return st.is_decision() ? A_ : 1;
  }
  bool is_decision(const State& st) const noexcept { return st.is_decision(); }
  double value_cap() const noexcept { return H_; }

  template <class Known, class Learned>
  void for_each_branch(const State& st, int action, Known&& known, Learned&& learned) const;

  /// Successor features: outcome = next state. Reveal features: 0 = tran, 1 = wait.
  State compose(const Context& ctx, std::int64_t x) const noexcept {
    State next = ctx.base;
    if (ctx.base.is_tran()) {
      next.s = static_cast<int>(x);
      next.queue = ctx.base.queue.popped();
      next.tag = -1;
    } else if (x == 0) {
      next.tag = kTranTag;
    } else {
      next.tag = ctx.base.tag + 1;
    }
    return next;
  }

  /// Walks the realized augmented path of a complete episode and reports
  /// (z, outcome) for every learned branch taken, in order.
  template <class F>
  void replay(const EpisodeLog& log, F&& on_sample) const;

  const DelayFeatureMap& features() const noexcept { return features_; }
  const AugIndexer& indexer() const noexcept { return indexer_; }
  DelayKnowledge knowledge() const noexcept { return knowledge_; }

 private:
  const TabularMdp& mdp_;
  const DelayModel& d_;
  DelayKnowledge knowledge_;
  EllTable ell_;
  AugIndexer indexer_;
  DelayFeatureMap features_;
  int H_;
  int A_;
};

template <class Known, class Learned>
void AugPkdModel::for_each_branch(const State& st, int action, Known&& known, Learned&& learned) const {
  auto split = [&](const AugState& base, int a1, int dt, const RevealFlags& flags) {
    const RevealKind kind = reveal_kind(flags, dt, d_.delta_max());
    const bool learn = knowledge_ == DelayKnowledge::kUnknown &&
                       (kind == RevealKind::kRegular || kind == RevealKind::kFresh);
    if (learn) {
      const auto fkind = kind == RevealKind::kFresh ? DelayFeatureKind::kFresh : DelayFeatureKind::kReveal;
      const std::uint64_t z = features_.id(fkind, base.s, a1, kind == RevealKind::kFresh ? 0 : dt);
      learned(1.0, 0.0, z, ell_.reveal[static_cast<std::size_t>(base.queue.size())], Context{base});
      return;
    }
    const double p = p_tran(d_, base.s, a1, dt, flags);
    if (p > 0.0) known(p, 0.0, compose(Context{base}, 0));
    if (p < 1.0) known(1.0 - p, 0.0, compose(Context{base}, 1));
  };

  if (st.is_decision()) {
    const ActionQueue q = st.queue.pushed(action);
    split(AugState{st.s, q, st.tag, st.h + 1}, q.front(), st.tag, reveal_flags(d_, H_, q, st.tag, st.h + 1));
  } else if (st.is_tran()) {
    const int a1 = st.queue.front();
    learned(1.0, mdp_.reward(st.s, a1), features_.id(DelayFeatureKind::kSuccessor, st.s, a1),
            ell_.successor[static_cast<std::size_t>(st.queue.size())], Context{st});
  } else if (st.queue.empty()) {
    known(1.0, 0.0, AugState{st.s, st.queue, 0, st.h});
  } else {
    split(st, st.queue.front(), -1, reveal_flags(d_, H_, st.queue, -1, st.h));
  }
}

template <class F>
void AugPkdModel::replay(const EpisodeLog& log, F&& on_sample) const {
  AugState st = initial_aug_state(mdp_);
  int t = 1;  // index of the last revealed state
  auto revealed = [&](int step) { return log.reveal_steps[static_cast<std::size_t>(t)] <= step; };
  auto split = [&](const AugState& base, int a1, int dt, const RevealFlags& flags, int step) {
    const RevealKind kind = reveal_kind(flags, dt, d_.delta_max());
    const bool tran = kind == RevealKind::kForced || revealed(step);
    if (knowledge_ == DelayKnowledge::kUnknown && (kind == RevealKind::kRegular || kind == RevealKind::kFresh)) {
      const auto fkind = kind == RevealKind::kFresh ? DelayFeatureKind::kFresh : DelayFeatureKind::kReveal;
      on_sample(features_.id(fkind, base.s, a1, kind == RevealKind::kFresh ? 0 : dt), tran ? 0 : 1);
    }
    return compose(Context{base}, tran ? 0 : 1);
  };
  while (!is_terminal(st, H_)) {
    if (st.is_decision()) {
      const ActionQueue q = st.queue.pushed(log.actions[static_cast<std::size_t>(st.h - 1)]);
      st = split(AugState{st.s, q, st.tag, st.h + 1}, q.front(), st.tag,
                 reveal_flags(d_, H_, q, st.tag, st.h + 1), st.h + 1);
    } else if (st.is_tran()) {
      const int next = log.states[static_cast<std::size_t>(t)];
      on_sample(features_.id(DelayFeatureKind::kSuccessor, st.s, st.queue.front()), next);
      st = compose(Context{st}, next);
      ++t;
    } else if (st.queue.empty()) {
      st = AugState{st.s, st.queue, 0, st.h};
    } else {
      st = split(st, st.queue.front(), -1, reveal_flags(d_, H_, st.queue, -1, st.h), st.h);
    }
  }
}

}  // namespace sdmdp
