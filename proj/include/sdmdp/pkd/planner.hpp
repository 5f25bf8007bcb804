#pragma once

#include "sdmdp/augmented/aug_state.hpp"
#include "sdmdp/core/errors.hpp"
#include "sdmdp/pkd/mvp_est.hpp"

#include <absl/container/inlined_vector.h>

#include <cstddef>
#include <string>

namespace sdmdp {

/// Optimistic planner for partially known dynamics, evaluated lazily over the
/// states reachable from wherever it is queried.
///
/// Model requirements:
///   using State; using Context;
///   std::uint64_t key(const State&) const;  std::uint64_t key_space() const;
///   int num_actions(const State&) const;    // 0 terminal, 1 intermediate
///   bool is_decision(const State&) const;
///   double value_cap() const;               // H
///   void for_each_branch(const State&, int action, Known&&, Learned&&) const;
///      Known(double prob, double reward, const State& next)
///      Learned(double weight, double reward, std::uint64_t z, double ell, const Context&)
///   State compose(const Context&, std::int64_t outcome) const;
/// Estimator requirements: EffView lookup(std::uint64_t z) const.
template <class Model, class Estimator>
class Planner {
 public:
  using State = typename Model::State;

  Planner(const Model& model, const Estimator& est, std::size_t budget)
      : model_(model), est_(est), memo_(model.key_space()), budget_(budget) {}

  double value(const State& st) { return entry(st).value; }

  /// Greedy action at a decision state, lowest index on ties.
  int greedy(const State& st) { return entry(st).action; }

  double q_value(const State& st, int action) {
    double acc = 0.0;
    model_.for_each_branch(
        st, action,
        [&](double prob, double reward, const State& next) { acc += prob * (reward + value(next)); },
        [&](double weight, double reward, std::uint64_t z, double ell, const typename Model::Context& ctx) {
          const EffView view = est_.lookup(z);
          if (view.count <= 1) {
            acc += weight * model_.value_cap();
            return;
          }
          absl::InlinedVector<double, 8> values(view.outcomes.size());
          for (std::size_t i = 0; i < values.size(); ++i) values[i] = value(model_.compose(ctx, view.outcomes[i]));
          acc += weight * mvp_est(reward, view.probs, values, view.count, ell, model_.value_cap());
        });
    return acc;
  }

  std::size_t size() const noexcept { return memo_.size(); }

 private:
  struct Entry {
    double value = 0.0;
    int action = -1;
  };

  Entry entry(const State& st) {
    const int n = model_.num_actions(st);
    if (n == 0) return Entry{0.0, -1};
    const std::uint64_t key = model_.key(st);
    if (const Entry* e = memo_.find(key)) return *e;
    Entry e;
    if (model_.is_decision(st)) {
      e.value = -1.0;
      for (int a = 0; a < n; ++a) {
        const double q = q_value(st, a);
        if (q > e.value) {
          e.value = q;
          e.action = a;
        }
      }
    } else {
      e.value = q_value(st, 0);
    }
    memo_.insert(key, e);
    if (memo_.size() > budget_) {
      throw ResourceError("planner exceeded its state budget of " + std::to_string(budget_), memo_.size());
    }
    return e;
  }

  const Model& model_;
  const Estimator& est_;
  AugMemo<Entry> memo_;
  std::size_t budget_;
};

}  // namespace sdmdp
