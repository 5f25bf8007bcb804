#pragma once

#include "sdmdp/delay/delayed_env.hpp"
#include "sdmdp/pkd/estimator.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sdmdp {

/// Feature families of the delayed specialization.
enum class DelayFeatureKind : std::uint64_t {
  kSuccessor = 0,  // z = (s, a, tran): next state of (s, a)
  kReveal = 1,     // z = (s, a, delta_tilde): reveal now or wait
  kFresh = 2,      // z = (s, a, 0) drawn with D_{t-1} = 0 (Delta = -1 clipped to 0)
};

/// Dense feature ids z = ((kind * S + s) * A + a) * (delta_max + 2) + delta_tilde + 1.
class DelayFeatureMap {
 public:
  DelayFeatureMap(int num_states, int num_actions, int delta_max)
      : S_(static_cast<std::uint64_t>(num_states)),
        A_(static_cast<std::uint64_t>(num_actions)),
        T_(static_cast<std::uint64_t>(delta_max + 2)) {}

  std::uint64_t id(DelayFeatureKind kind, int s, int a, int delta_tilde = -1) const noexcept {
    return ((static_cast<std::uint64_t>(kind) * S_ + static_cast<std::uint64_t>(s)) * A_ +
            static_cast<std::uint64_t>(a)) * T_ +
           static_cast<std::uint64_t>(delta_tilde + 1);
  }
  struct Decoded {
    DelayFeatureKind kind;
    int s;
    int a;
    int delta_tilde;
  };
  Decoded decode(std::uint64_t z) const noexcept {
    const int dt = static_cast<int>(z % T_) - 1;
    z /= T_;
    const int a = static_cast<int>(z % A_);
    z /= A_;
    const int s = static_cast<int>(z % S_);
    return {static_cast<DelayFeatureKind>(z / S_), s, a, dt};
  }
  std::uint64_t size() const noexcept { return 3 * S_ * A_ * T_; }

 private:
  std::uint64_t S_, A_, T_;
};

/// Count tables maintained from complete episode logs:
///   N(s,a), N(s,a,dt) = #{visits with Delta >= dt}, P_hat(s,a) and
///   P_hat_tran(s,a,dt) = (N(s,a,dt) - N(s,a,dt+1)) / N(s,a,dt).
class DelayedEstimator {
 public:
  /// track_reveal_counts decides whether N(s,a,dt) crossing a power of two
  /// bumps revision() (only the unknown-delay learner reads those counts).
  DelayedEstimator(int num_states, int num_actions, int delta_max, bool track_reveal_counts = true);

  void update_from_log(const EpisodeLog& log);
  /// Single visit of (s, a) with inter-arrival delta and successor s_next.
  void add_visit(int s, int a, int delta, int s_next);

  std::uint64_t n(int s, int a) const { return n_sa_[sa(s, a)]; }
  /// N(s,a,dt) for dt in [-1, delta_max + 1].
  std::uint64_t n(int s, int a, int delta_tilde) const;
  /// Absent when N(s,a) = 0.
  std::optional<std::vector<double>> p_hat(int s, int a) const;
  /// Absent when N(s,a,dt) = 0.
  std::optional<double> p_tran_hat(int s, int a, int delta_tilde) const;
  /// Reveal estimate for a fresh draw: (N(s,a,-1) - N(s,a,1)) / N(s,a,-1).
  std::optional<double> p_fresh_hat(int s, int a) const;

  EffView lookup(std::uint64_t z) const;
  const DelayFeatureMap& features() const noexcept { return features_; }
  std::uint64_t revision() const noexcept { return revision_.revision(); }

  nlohmann::json snapshot() const;

 private:
  struct SuccRow {
    std::vector<std::int64_t> outcomes;
    std::vector<std::uint64_t> hits;
    std::vector<double> probs;
  };
  struct SplitRow {
    std::uint64_t count = 0;
    std::vector<std::int64_t> outcomes;
    std::vector<double> probs;
  };

  std::size_t sa(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(A_) + static_cast<std::size_t>(a);
  }
  std::size_t cum(int s, int a, int delta_tilde) const {
    return sa(s, a) * static_cast<std::size_t>(delta_max_ + 3) + static_cast<std::size_t>(delta_tilde + 1);
  }
  void refresh_split_rows(int s, int a);
  static void set_split(SplitRow& row, std::uint64_t count, std::uint64_t reveal);

  int S_, A_, delta_max_;
  bool track_reveal_counts_;
  DelayFeatureMap features_;
  std::vector<std::uint64_t> n_sa_;
  std::vector<std::uint64_t> n_cum_;
  std::vector<SuccRow> succ_;
  std::vector<SplitRow> reveal_;  // (s, a, dt) for dt in [-1, delta_max]
  std::vector<SplitRow> fresh_;
  RevisionCounter revision_;
};

/// ell*(D, b) = (D log A + log(64 H (D+1)^2 Dm S A K / delta))
///              min (b log(32 H b Dm S A K / delta)),  Dm = max(delta_max, 1).
double ell_star_delayed(int queue_len, double branching, int horizon, int delta_max, int num_states,
                        int num_actions, double episodes, double delta);

}  // namespace sdmdp
