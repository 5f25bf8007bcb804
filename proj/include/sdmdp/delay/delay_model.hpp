#pragma once

#include "sdmdp/core/categorical.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sdmdp {

/// Per-(s,a) inter-arrival distributions over [-1, delta_max] together with
/// the delay cap. Rows are Categoricals of size delta_max + 2 where index i
/// holds the mass of inter-arrival i - 1.
///
/// constant_mode = D selects the fast constant-delay construction: s_1 is
/// observed at once, the first inter-arrival acts as D and every later one is
/// taken from the rows (normally a point mass at 0).
class DelayModel {
 public:
  DelayModel(int num_states, int num_actions, int delta_max, int d_max, bool known,
             std::vector<Categorical> rows, std::optional<int> constant_mode = std::nullopt);

  /// Delta = 0 everywhere, D_max = 0: the undelayed MDP.
  static DelayModel zero_delay(int num_states, int num_actions);
  /// Fast constant-delay model with D_h = delay for every real step.
  static DelayModel constant(int num_states, int num_actions, int delay);

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  int delta_max() const noexcept { return delta_max_; }
  int d_max() const noexcept { return d_max_; }
  bool known() const noexcept { return known_; }
  std::optional<int> constant_mode() const noexcept { return constant_mode_; }

  const Categorical& row(int s, int a) const { return rows_[index(s, a)]; }
  /// P_delay(s,a)(delta) for delta in [-1, delta_max]; 0 outside.
  double prob(int s, int a, int delta) const;
  /// Sum of P_delay(s,a)(x) over x >= delta.
  double tail(int s, int a, int delta) const;
  /// Draws an inter-arrival from u in [0,1).
  int sample(int s, int a, double u) const { return row(s, a).sample(u) - 1; }

  DelayModel with_known(bool known) const;

  friend bool operator==(const DelayModel&, const DelayModel&) = default;

 private:
  std::size_t index(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
           static_cast<std::size_t>(a);
  }

  int num_states_;
  int num_actions_;
  int delta_max_;
  int d_max_;
  bool known_;
  std::vector<Categorical> rows_;
  std::optional<int> constant_mode_;
};

void to_json(nlohmann::json& j, const DelayModel& d);
/// Dimensions come from the paired MDP; the JSON stores only the rows.
DelayModel delay_from_json(const nlohmann::json& j, int num_states, int num_actions);

}  // namespace sdmdp
