#include "sdmdp/delay/delay_model.hpp"

#include "sdmdp/core/errors.hpp"

#include <string>

namespace sdmdp {

DelayModel::DelayModel(int num_states, int num_actions, int delta_max, int d_max, bool known,
                       std::vector<Categorical> rows, std::optional<int> constant_mode)
    : num_states_(num_states),
      num_actions_(num_actions),
      delta_max_(delta_max),
      d_max_(d_max),
      known_(known),
      rows_(std::move(rows)),
      constant_mode_(constant_mode) {
  if (num_states_ <= 0 || num_actions_ <= 0) throw ValidationError("delay model needs S, A > 0");
  if (delta_max_ < 0) throw ValidationError("delta_max must be non-negative");
  if (d_max_ < 0) throw ValidationError("d_max must be non-negative");
  if (delta_max_ > d_max_) {
    throw ValidationError("delta_max = " + std::to_string(delta_max_) + " exceeds d_max = " +
                          std::to_string(d_max_));
  }
  const auto expected = static_cast<std::size_t>(num_states_) * static_cast<std::size_t>(num_actions_);
  if (rows_.size() != expected) {
    throw ValidationError("p_delay has " + std::to_string(rows_.size()) +
                          " rows, expected S*A = " + std::to_string(expected));
  }
  for (const auto& r : rows_) {
    if (r.size() != delta_max_ + 2) {
      throw ValidationError("p_delay row must have delta_max + 2 = " +
                            std::to_string(delta_max_ + 2) + " entries");
    }
  }
  if (constant_mode_) {
    if (*constant_mode_ < 0 || *constant_mode_ > d_max_ || *constant_mode_ > delta_max_) {
      throw ValidationError("constant_mode must lie in [0, min(delta_max, d_max)]");
    }
  }
}

DelayModel DelayModel::zero_delay(int num_states, int num_actions) {
  std::vector<Categorical> rows(static_cast<std::size_t>(num_states * num_actions),
                                Categorical::point_mass(2, 1));
  return DelayModel(num_states, num_actions, 0, 0, true, std::move(rows));
}

DelayModel DelayModel::constant(int num_states, int num_actions, int delay) {
  if (delay == 0) return zero_delay(num_states, num_actions);
  std::vector<Categorical> rows(static_cast<std::size_t>(num_states * num_actions),
                                Categorical::point_mass(delay + 2, 1));
  return DelayModel(num_states, num_actions, delay, delay, true, std::move(rows), delay);
}

double DelayModel::prob(int s, int a, int delta) const {
  if (delta < -1 || delta > delta_max_) return 0.0;
  return row(s, a)[delta + 1];
}

double DelayModel::tail(int s, int a, int delta) const {
  double acc = 0.0;
  const auto& r = row(s, a);
  for (int i = std::max(delta, -1) + 1; i < r.size(); ++i) acc += r[i];
  return acc;
}

DelayModel DelayModel::with_known(bool known) const {
  DelayModel out = *this;
  out.known_ = known;
  return out;
}

void to_json(nlohmann::json& j, const DelayModel& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < d.num_states(); ++s) {
    for (int a = 0; a < d.num_actions(); ++a) {
      const auto p = d.row(s, a).probabilities();
      rows.push_back(std::vector<double>(p.begin(), p.end()));
    }
  }
  j = nlohmann::json{{"delta_max", d.delta_max()},
                     {"d_max", d.d_max()},
                     {"known", d.known()},
                     {"p_delay", std::move(rows)}};
  if (d.constant_mode()) j["constant_mode"] = *d.constant_mode();
}

DelayModel delay_from_json(const nlohmann::json& j, int num_states, int num_actions) {
  try {
    std::vector<Categorical> rows;
    for (const auto& row : j.at("p_delay")) {
      rows.push_back(Categorical::from_probabilities(row.get<std::vector<double>>()));
    }
    std::optional<int> constant;
    if (j.contains("constant_mode")) constant = j.at("constant_mode").get<int>();
    return DelayModel(num_states, num_actions, j.at("delta_max").get<int>(),
                      j.at("d_max").get<int>(), j.value("known", true), std::move(rows), constant);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed delay JSON: ") + e.what());
  }
}

}  // namespace sdmdp
