#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdmdp {

enum class ReplanSchedule {
  kEveryEpisode,  // plan before each episode
  kDoubling,      // replan only after some count reached a power of two
};

ReplanSchedule replan_from_string(const std::string& s);
std::string to_string(ReplanSchedule s);

struct RunOptions {
  int episodes = 1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  /// Exact value of the executed policy every `oracle_stride` episodes
  /// (always at episode 1); 0 disables the oracle.
  int oracle_stride = 10;
  ReplanSchedule replan = ReplanSchedule::kEveryEpisode;
  std::size_t budget = 10'000'000;
  /// Optimal value used for regret; computed by the runner when absent.
  std::optional<double> optimal_value;
};

struct TraceRow {
  int episode = 0;
  double value_estimate = 0.0;
  double realized_return = 0.0;
  std::optional<double> exact_policy_value;
  double cumulative_regret = 0.0;
  std::uint64_t seed = 0;
};

/// Per-episode learner record. cumulative_regret sums V* minus the exact
/// value of the executed policy; episodes without an oracle call reuse the
/// latest exact value.
class RegretTrace {
 public:
  explicit RegretTrace(double optimal_value = 0.0) : optimal_(optimal_value) {}

  void add(int episode, double value_estimate, double realized, std::optional<double> exact,
           std::uint64_t seed);
  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  double optimal_value() const noexcept { return optimal_; }

  void write_csv(std::ostream& out) const;
  /// Throws ValidationError with the source name and line on malformed input.
  static std::vector<TraceRow> read_csv(std::istream& in, const std::string& source);

 private:
  double optimal_;
  std::optional<double> last_exact_;
  double cumulative_ = 0.0;
  std::vector<TraceRow> rows_;
};

inline constexpr const char* kTraceHeader =
    "episode,k_value_estimate,realized_return,exact_policy_value,cumulative_regret,seed";

}  // namespace sdmdp
