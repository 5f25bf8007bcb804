#include "sdmdp/instances/instances.hpp"

#include "sdmdp/core/errors.hpp"
#include "sdmdp/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sdmdp {

namespace {

using Rows = std::vector<std::vector<double>>;

struct Builder {
  int S, A;
  std::vector<double> rewards;
  Rows probs;

  Builder(int num_states, int num_actions)
      : S(num_states),
        A(num_actions),
        rewards(static_cast<std::size_t>(num_states * num_actions), 0.0),
        probs(static_cast<std::size_t>(num_states * num_actions),
              std::vector<double>(static_cast<std::size_t>(num_states), 0.0)) {}

  std::vector<double>& row(int s, int a) { return probs[static_cast<std::size_t>(s * A + a)]; }
  void go(int s, int a, int next) { row(s, a)[static_cast<std::size_t>(next)] = 1.0; }
  void reward(int s, int a, double r) { rewards[static_cast<std::size_t>(s * A + a)] = r; }

  TabularMdp finish(int horizon, int branching, int initial) {
    std::vector<Categorical> rows;
    rows.reserve(probs.size());
    for (auto& p : probs) rows.push_back(Categorical::from_probabilities(std::move(p)));
    return TabularMdp(S, A, horizon, branching, initial, std::move(rewards), std::move(rows));
  }
};

void fill_code(Builder& b, int offset, int depth, CodeReward reward) {
  const int succ = offset + 2 * depth;
  const int fail = succ + 1;
  for (int a = 0; a < b.A; ++a) {
    for (int i = 1; i <= depth; ++i) {
      for (int bit = 0; bit < 2; ++bit) {
        const int s = code_state(i, bit, offset);
        if (i >= 2) {
          b.go(s, a, code_state(i - 1, bit, offset));
        } else {
          b.go(s, a, a == bit ? succ : fail);
        }
      }
    }
    b.reward(succ, a, 1.0);
    b.go(succ, a, reward == CodeReward::kWeighted ? succ : fail);
    b.go(fail, a, fail);
  }
}

void set_code_entry(std::vector<double>& row, const std::vector<double>& theta, int offset) {
  const double D = static_cast<double>(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    row[static_cast<std::size_t>(code_state(i, 0, offset))] = (1.0 - theta[k]) / (2.0 * D);
    row[static_cast<std::size_t>(code_state(i, 1, offset))] = (1.0 + theta[k]) / (2.0 * D);
  }
}

void check_theta(const std::vector<double>& theta) {
  if (theta.empty()) throw ValidationError("theta must be non-empty");
  for (double t : theta) {
    if (!(std::abs(t) <= 1.0)) throw ValidationError("theta entries must lie in [-1, 1]");
  }
}

std::vector<double> exponential_weights(CounterRng& rng, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& x : w) x = -std::log1p(-rng.uniform());
  return w;
}

}  // namespace

int code_state(int i, int b, int offset) { return offset + 2 * (i - 1) + b; }

DelayedInstance build_code_mdp(const CodeMdpSpec& spec, CodeReward reward) {
  check_theta(spec.theta);
  const int D = static_cast<int>(spec.theta.size());
  if (spec.depth != D) throw ValidationError("theta must have `depth` entries");
  if (spec.horizon_eff < D + 1) throw ValidationError("effective horizon must be at least depth + 1");
  if (spec.num_actions < 2) throw ValidationError("a CodeMDP needs at least two actions");
  const int S = 2 * D + 3;
  Builder b(S, spec.num_actions);
  fill_code(b, 1, D, reward);
  for (int a = 0; a < spec.num_actions; ++a) set_code_entry(b.row(0, a), spec.theta, 1);
  TabularMdp mdp = b.finish(spec.horizon_eff + 1, 2 * D, 0);
  DelayModel delay = DelayModel::constant(S, spec.num_actions, D);
  return DelayedInstance{std::move(mdp), std::move(delay)};
}

CodeValue code_value(const std::vector<double>& theta, int horizon_eff) {
  check_theta(theta);
  const double D = static_cast<double>(theta.size());
  CodeValue v;
  double l1 = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double i = static_cast<double>(k + 1);
    l1 += std::abs(theta[k]);
    v.weighted += (horizon_eff - i) * (1.0 + std::abs(theta[k]));
  }
  v.plain = 0.5 + l1 / (2.0 * D);
  v.weighted /= 2.0 * D;
  return v;
}

int hard_leaf_count(int S) {
  for (int L = 1; 4 * L < S; L *= 2) {
    if (8 * L >= S) return L;
  }
  throw ValidationError("no power of two L with S/8 <= L < S/4 for S = " + std::to_string(S));
}

int hard_d_tilde(const HardInstanceConfig& cfg) {
  const int d = std::min({cfg.d_max, cfg.H / 4, cfg.B / 2, cfg.S / 4 - 1});
  if (d < 1) throw ValidationError("D = min{D_max, H/4, B/2, S/4 - 1} must be at least 1");
  return d;
}

HardInstance build_hard_instance(const HardInstanceConfig& cfg) {
  if (cfg.A < 2) throw ValidationError("hard instances need A >= 2");
  if (cfg.H < 8.0 + 4.0 * std::log(static_cast<double>(cfg.S)) / std::log(static_cast<double>(cfg.A))) {
    throw ValidationError("condition H >= 8 + 4 log_A S violated");
  }
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0) || !(cfg.gap >= 0.0)) {
    throw ValidationError("epsilon must lie in [0, 1] and gap must be >= 0");
  }
  struct {
    int d_tilde, leaves, tree_depth, tree_states, horizon_eff, best_leaf, best_action;
    std::vector<std::vector<double>> theta;
    nlohmann::json meta;
  } out;
  out.d_tilde = hard_d_tilde(cfg);
  out.leaves = hard_leaf_count(cfg.S);
  const int D = out.d_tilde;
  const int A = cfg.A;
  const int L = out.leaves;

  std::vector<int> level_size{1};
  while (level_size.back() < L) level_size.push_back(std::min(level_size.back() * A, L));
  out.tree_depth = static_cast<int>(level_size.size()) - 1;
  out.tree_states = std::accumulate(level_size.begin(), level_size.end(), 0);
  const int S = out.tree_states + 2 * D + 2;
  if (S > cfg.S) throw ValidationError("tree and code need more than S states");
  if (out.tree_depth + 1 + D > cfg.H / 2) throw ValidationError("tree-plus-code path exceeds H/2 steps");
  out.horizon_eff = cfg.H - out.tree_depth - 1;

  CounterRng rng(SeedSpec{cfg.seed, 0, 0, StreamPurpose::kInstance});
  const auto pairs = static_cast<std::uint64_t>(L * A);
  const auto best = static_cast<int>(rng.below(pairs));
  out.best_leaf = best / A;
  out.best_action = best % A;
  const double boosted = std::min(1.0, cfg.epsilon + cfg.gap / D);
  for (int p = 0; p < L * A; ++p) {
    std::vector<double> theta(static_cast<std::size_t>(D));
    for (auto& t : theta) t = (rng.below(2) == 0 ? -1.0 : 1.0) * (p == best ? boosted : cfg.epsilon);
    out.theta.push_back(std::move(theta));
  }

  Builder b(S, A);
  int first = 0;
  for (std::size_t j = 0; j + 1 < level_size.size(); ++j) {
    const int next_first = first + level_size[j];
    for (int u = 0; u < level_size[j]; ++u) {
      for (int a = 0; a < A; ++a) b.go(first + u, a, next_first + (u * A + a) % level_size[j + 1]);
    }
    first = next_first;
  }
  const int offset = out.tree_states;
  for (int l = 0; l < L; ++l) {
    for (int a = 0; a < A; ++a) {
      set_code_entry(b.row(first + l, a), out.theta[static_cast<std::size_t>(l * A + a)], offset);
    }
  }
  fill_code(b, offset, D, CodeReward::kWeighted);
  TabularMdp mdp = b.finish(cfg.H, cfg.B, 0);
  if (mdp.max_support() > cfg.B) throw ValidationError("branching exceeds B");
  DelayModel delay = DelayModel::constant(S, A, D);
  out.meta = {{"generator", "hard"},
              {"S", cfg.S},
              {"A", cfg.A},
              {"H", cfg.H},
              {"d_max", cfg.d_max},
              {"B", cfg.B},
              {"epsilon", cfg.epsilon},
              {"gap", cfg.gap},
              {"seed", cfg.seed},
              {"d_tilde", D},
              {"leaves", L},
              {"tree_depth", out.tree_depth},
              {"horizon_eff", out.horizon_eff},
              {"best_leaf", out.best_leaf},
              {"best_action", out.best_action},
              {"theta", out.theta}};
  return HardInstance{DelayedInstance{std::move(mdp), std::move(delay)},
                      out.d_tilde,
                      out.leaves,
                      out.tree_depth,
                      out.tree_states,
                      out.horizon_eff,
                      out.best_leaf,
                      out.best_action,
                      std::move(out.theta),
                      std::move(out.meta)};
}

double hard_instance_value(const HardInstance& inst) {
  double best = 0.0;
  for (const auto& theta : inst.theta) best = std::max(best, code_value(theta, inst.horizon_eff).weighted);
  return best;
}

DelayedInstance random_sdmdp(const RandomSdmdpConfig& cfg) {
  if (cfg.S < 1 || cfg.A < 1 || cfg.H < 1) throw ValidationError("S, A, H must be positive");
  if (cfg.B < 1 || cfg.B > cfg.S) throw ValidationError("need 1 <= B <= S");
  if (cfg.delta_max < 0 || cfg.delta_max > cfg.d_max) throw ValidationError("need 0 <= delta_max <= D_max");
  CounterRng rng(SeedSpec{cfg.seed, 0, 0, StreamPurpose::kInstance});
  CounterRng delay_rng(SeedSpec{cfg.seed, 1, 0, StreamPurpose::kInstance});
  std::vector<double> rewards;
  std::vector<Categorical> rows;
  std::vector<Categorical> delay_rows;
  std::vector<int> states(static_cast<std::size_t>(cfg.S));
  for (int i = 0; i < cfg.S * cfg.A; ++i) {
    rewards.push_back(rng.uniform());
    std::iota(states.begin(), states.end(), 0);
    for (int k = 0; k < cfg.B; ++k) {
      const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.S - k)));
      std::swap(states[static_cast<std::size_t>(k)], states[static_cast<std::size_t>(j)]);
    }
    const auto w = exponential_weights(rng, cfg.B);
    std::vector<double> p(static_cast<std::size_t>(cfg.S), 0.0);
    for (int k = 0; k < cfg.B; ++k) p[static_cast<std::size_t>(states[static_cast<std::size_t>(k)])] = w[static_cast<std::size_t>(k)];
    rows.push_back(Categorical::normalized(std::move(p)));
    auto dw = exponential_weights(delay_rng, cfg.delta_max + 2);
    if (!cfg.allow_negative) dw[0] = 0.0;
    delay_rows.push_back(Categorical::normalized(std::move(dw)));
  }
  TabularMdp mdp(cfg.S, cfg.A, cfg.H, cfg.B, 0, std::move(rewards), std::move(rows));
  DelayModel delay(cfg.S, cfg.A, cfg.delta_max, cfg.d_max, cfg.known, std::move(delay_rows));
  return DelayedInstance{std::move(mdp), std::move(delay)};
}

nlohmann::json instance_to_json(const DelayedInstance& inst, const nlohmann::json& meta) {
  nlohmann::json j = inst.mdp;
  j["delay"] = inst.delay;
  if (!meta.is_null()) j["meta"] = meta;
  return j;
}

LoadedInstance instance_from_json(const nlohmann::json& j) {
  TabularMdp mdp = mdp_from_json(j);
  DelayModel delay = j.contains("delay")
                         ? delay_from_json(j.at("delay"), mdp.num_states(), mdp.num_actions())
                         : DelayModel::zero_delay(mdp.num_states(), mdp.num_actions());
  nlohmann::json meta = j.contains("meta") ? j.at("meta") : nlohmann::json(nullptr);
  return LoadedInstance{DelayedInstance{std::move(mdp), std::move(delay)}, std::move(meta)};
}

LoadedInstance generate_instance(const nlohmann::json& spec) {
  try {
    const std::string gen = spec.at("generator").get<std::string>();
    if (gen == "random") {
      RandomSdmdpConfig c;
      c.S = spec.value("S", c.S);
      c.A = spec.value("A", c.A);
      c.H = spec.value("H", c.H);
      c.B = spec.value("B", c.B);
      c.delta_max = spec.value("delta_max", c.delta_max);
      c.d_max = spec.value("d_max", c.d_max);
      c.allow_negative = spec.value("allow_negative", c.allow_negative);
      c.known = spec.value("known", c.known);
      c.seed = spec.value("seed", c.seed);
      nlohmann::json meta = spec;
      return LoadedInstance{random_sdmdp(c), std::move(meta)};
    }
    if (gen == "hard") {
      HardInstanceConfig c;
      c.S = spec.value("S", c.S);
      c.A = spec.value("A", c.A);
      c.H = spec.value("H", c.H);
      c.d_max = spec.value("d_max", c.d_max);
      c.B = spec.value("B", c.B);
      c.epsilon = spec.value("epsilon", c.epsilon);
      c.gap = spec.value("gap", c.gap);
      c.seed = spec.value("seed", c.seed);
      HardInstance h = build_hard_instance(c);
      h.meta["optimal_value"] = hard_instance_value(h);
      return LoadedInstance{std::move(h.instance), std::move(h.meta)};
    }
    if (gen == "code") {
      CodeMdpSpec c;
      c.theta = spec.at("theta").get<std::vector<double>>();
      c.depth = static_cast<int>(c.theta.size());
      c.horizon_eff = spec.value("horizon_eff", c.depth + 1);
      c.num_actions = spec.value("A", 2);
      const std::string r = spec.value("reward", std::string("weighted"));
      if (r != "plain" && r != "weighted") throw ValidationError("reward must be plain or weighted");
      const CodeReward reward = r == "plain" ? CodeReward::kPlain : CodeReward::kWeighted;
      nlohmann::json meta = spec;
      const CodeValue v = code_value(c.theta, c.horizon_eff);
      meta["optimal_value"] = reward == CodeReward::kPlain ? v.plain : v.weighted;
      return LoadedInstance{build_code_mdp(c, reward), std::move(meta)};
    }
    throw ValidationError("unknown generator '" + gen + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed generator spec: ") + e.what());
  }
}

}  // namespace sdmdp
