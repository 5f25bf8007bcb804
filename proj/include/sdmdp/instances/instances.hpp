#pragma once

#include "sdmdp/core/tabular_mdp.hpp"
#include "sdmdp/delay/delay_model.hpp"
#include "sdmdp/delay/delayed_env.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sdmdp {

enum class CodeReward {
  kPlain,     // succ pays 1 once and moves to fail
  kWeighted,  // succ is absorbing and pays 1 per step
};

/// Codeword gadget of depth D with bias vector theta in [-1, 1]^D and
/// effective horizon H_eff >= D + 1.
struct CodeMdpSpec {
  int depth = 1;
  std::vector<double> theta;
  int horizon_eff = 2;
  int num_actions = 2;
};

/// Standalone CodeMDP: state 0 draws (i, b) from P(theta) under any action,
/// then (i, b) -> (i-1, b) until (1, b), where action b leads to succ. Layout:
/// 0 start, 1 + 2(i-1) + b for (i, b), then succ, fail. Horizon H_eff + 1,
/// constant observation delay D.
DelayedInstance build_code_mdp(const CodeMdpSpec& spec, CodeReward reward);
int code_state(int i, int b, int offset = 1);

struct CodeValue {
  double plain = 0.0;     // 1/2 + |theta|_1 / (2D)
  double weighted = 0.0;  // (1/2D) sum_i (H_eff - i)(1 + |theta_i|)
};
CodeValue code_value(const std::vector<double>& theta, int horizon_eff);

struct HardInstanceConfig {
  int S = 36;
  int A = 2;
  int H = 32;
  int d_max = 8;
  int B = 16;
  /// |theta_i| of every leaf-action pair; signs are random.
  double epsilon = 0.25;
  /// Extra l1 mass given to the distinguished pair.
  double gap = 0.5;
  std::uint64_t seed = 0;
};

struct HardInstance {
  DelayedInstance instance;
  int d_tilde = 0;
  int leaves = 0;
  int tree_depth = 0;
  int tree_states = 0;
  int horizon_eff = 0;
  int best_leaf = 0;
  int best_action = 0;
  std::vector<std::vector<double>> theta;  // indexed leaf * A + action
  nlohmann::json meta;
};

/// D = min{D_max, H/4, B/2, S/4 - 1} (floors); leaf count L is the power of
/// two with S/8 <= L < S/4. Throws ValidationError naming the violated
/// condition when the configuration is infeasible.
int hard_d_tilde(const HardInstanceConfig& cfg);
int hard_leaf_count(int S);
HardInstance build_hard_instance(const HardInstanceConfig& cfg);
/// Optimal value of a hard instance: the best leaf-action code value.
double hard_instance_value(const HardInstance& inst);

struct RandomSdmdpConfig {
  int S = 4;
  int A = 2;
  int H = 5;
  int B = 2;
  int delta_max = 1;
  int d_max = 1;
  bool allow_negative = true;  // give Delta = -1 positive mass
  bool known = true;
  std::uint64_t seed = 0;
};

/// Supports of size exactly B chosen uniformly, Dirichlet(1) weights, uniform
/// rewards, Dirichlet(1) inter-arrival rows.
DelayedInstance random_sdmdp(const RandomSdmdpConfig& cfg);

/// Instance file: the MDP fields plus optional "delay" and "meta" blocks.
nlohmann::json instance_to_json(const DelayedInstance& inst, const nlohmann::json& meta = nullptr);
struct LoadedInstance {
  DelayedInstance instance;
  nlohmann::json meta;
};
/// A missing "delay" block means the undelayed instance.
LoadedInstance instance_from_json(const nlohmann::json& j);

/// Generator spec: {"generator": "random" | "hard" | "code", ...parameters}.
LoadedInstance generate_instance(const nlohmann::json& spec);

}  // namespace sdmdp
