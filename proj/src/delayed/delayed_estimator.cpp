#include "sdmdp/delayed/delayed_estimator.hpp"

#include "sdmdp/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdmdp {

DelayedEstimator::DelayedEstimator(int num_states, int num_actions, int delta_max, bool track_reveal_counts)
    : S_(num_states),
      A_(num_actions),
      delta_max_(delta_max),
      track_reveal_counts_(track_reveal_counts),
      features_(num_states, num_actions, delta_max),
      n_sa_(static_cast<std::size_t>(num_states * num_actions), 0),
      n_cum_(static_cast<std::size_t>(num_states * num_actions * (delta_max + 3)), 0),
      succ_(static_cast<std::size_t>(num_states * num_actions)),
      reveal_(static_cast<std::size_t>(num_states * num_actions * (delta_max + 3))),
      fresh_(static_cast<std::size_t>(num_states * num_actions)) {}

void DelayedEstimator::update_from_log(const EpisodeLog& log) {
  for (std::size_t h = 0; h < log.actions.size(); ++h) {
    add_visit(log.states[h], log.actions[h], log.deltas[h], log.states[h + 1]);
  }
}

void DelayedEstimator::add_visit(int s, int a, int delta, int s_next) {
  if (s < 0 || s >= S_ || a < 0 || a >= A_ || s_next < 0 || s_next >= S_) {
    throw ValidationError("visit out of range");
  }
  if (delta < -1 || delta > delta_max_) throw ValidationError("inter-arrival out of range");
  const std::size_t i = sa(s, a);
  revision_.touch(++n_sa_[i]);
  for (int dt = -1; dt <= delta; ++dt) {
    const std::uint64_t c = ++n_cum_[cum(s, a, dt)];
    if (track_reveal_counts_ && dt >= 0) revision_.touch(c);
  }
  SuccRow& row = succ_[i];
  auto it = std::lower_bound(row.outcomes.begin(), row.outcomes.end(), s_next);
  const auto pos = static_cast<std::size_t>(it - row.outcomes.begin());
  if (it == row.outcomes.end() || *it != s_next) {
    row.outcomes.insert(it, s_next);
    row.hits.insert(row.hits.begin() + static_cast<std::ptrdiff_t>(pos), 0);
  }
  ++row.hits[pos];
  row.probs.resize(row.hits.size());
  for (std::size_t k = 0; k < row.hits.size(); ++k) {
    row.probs[k] = static_cast<double>(row.hits[k]) / static_cast<double>(n_sa_[i]);
  }
  refresh_split_rows(s, a);
}

void DelayedEstimator::set_split(SplitRow& row, std::uint64_t count, std::uint64_t reveal) {
  row.count = count;
  row.outcomes.clear();
  row.probs.clear();
  if (count == 0) return;
  const double n = static_cast<double>(count);
  if (reveal > 0) {
    row.outcomes.push_back(0);
    row.probs.push_back(static_cast<double>(reveal) / n);
  }
  if (reveal < count) {
    row.outcomes.push_back(1);
    row.probs.push_back(static_cast<double>(count - reveal) / n);
  }
}

void DelayedEstimator::refresh_split_rows(int s, int a) {
  for (int dt = -1; dt <= delta_max_; ++dt) {
    const std::uint64_t here = n_cum_[cum(s, a, dt)];
    const std::uint64_t above = n_cum_[cum(s, a, dt + 1)];
    set_split(reveal_[cum(s, a, dt)], here, here - above);
  }
  const std::uint64_t all = n_cum_[cum(s, a, -1)];
  set_split(fresh_[sa(s, a)], all, all - n_cum_[cum(s, a, 1)]);
}

std::uint64_t DelayedEstimator::n(int s, int a, int delta_tilde) const {
  if (delta_tilde < -1) return n(s, a, -1);
  if (delta_tilde > delta_max_ + 1) return 0;
  return n_cum_[cum(s, a, delta_tilde)];
}

std::optional<std::vector<double>> DelayedEstimator::p_hat(int s, int a) const {
  const std::size_t i = sa(s, a);
  if (n_sa_[i] == 0) return std::nullopt;
  std::vector<double> p(static_cast<std::size_t>(S_), 0.0);
  const auto& row = succ_[i];
  for (std::size_t k = 0; k < row.outcomes.size(); ++k) p[static_cast<std::size_t>(row.outcomes[k])] = row.probs[k];
  return p;
}

std::optional<double> DelayedEstimator::p_tran_hat(int s, int a, int delta_tilde) const {
  const std::uint64_t here = n(s, a, delta_tilde);
  if (here == 0) return std::nullopt;
  return static_cast<double>(here - n(s, a, delta_tilde + 1)) / static_cast<double>(here);
}

std::optional<double> DelayedEstimator::p_fresh_hat(int s, int a) const {
  const std::uint64_t all = n(s, a, -1);
  if (all == 0) return std::nullopt;
  return static_cast<double>(all - n(s, a, 1)) / static_cast<double>(all);
}

EffView DelayedEstimator::lookup(std::uint64_t z) const {
  const auto f = features_.decode(z);
  switch (f.kind) {
    case DelayFeatureKind::kSuccessor: {
      const std::size_t i = sa(f.s, f.a);
      return EffView{n_sa_[i], succ_[i].outcomes, succ_[i].probs};
    }
    case DelayFeatureKind::kReveal: {
      const auto& row = reveal_[cum(f.s, f.a, f.delta_tilde)];
      return EffView{row.count, row.outcomes, row.probs};
    }
    case DelayFeatureKind::kFresh: {
      const auto& row = fresh_[sa(f.s, f.a)];
      return EffView{row.count, row.outcomes, row.probs};
    }
  }
  return {};
}

nlohmann::json DelayedEstimator::snapshot() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (int s = 0; s < S_; ++s) {
    for (int a = 0; a < A_; ++a) {
      if (n(s, a) == 0) continue;
      std::vector<std::uint64_t> cums;
      for (int dt = -1; dt <= delta_max_ + 1; ++dt) cums.push_back(n(s, a, dt));
      const auto& row = succ_[sa(s, a)];
      pairs.push_back({{"s", s},
                       {"a", a},
                       {"n", n(s, a)},
                       {"n_delta_from_minus1", cums},
                       {"successors", row.outcomes},
                       {"successor_hits", row.hits}});
    }
  }
  return nlohmann::json{{"delta_max", delta_max_}, {"pairs", std::move(pairs)}};
}

double ell_star_delayed(int queue_len, double branching, int horizon, int delta_max, int num_states,
                        int num_actions, double episodes, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const double D = queue_len;
  const double dm = std::max(delta_max, 1);
  const double base = horizon * dm * num_states * num_actions * episodes / delta;
  const double first = D * std::log(static_cast<double>(num_actions)) + std::log(64.0 * (D + 1) * (D + 1) * base);
  const double second = branching * std::log(32.0 * branching * base);
  return std::min(first, second);
}

}  // namespace sdmdp
