#pragma once

#include <cstdint>
#include <limits>

namespace sdmdp {

enum class StreamPurpose : std::uint64_t {
  kTransition = 1,
  kDelay = 2,
  kPolicy = 3,
  kInstance = 4,
  kPlanner = 5,
  kTest = 6,
};

/// Labels that select one independent random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t run_id = 0;
  std::uint64_t episode = 0;
  StreamPurpose purpose = StreamPurpose::kTransition;

  SeedSpec with_episode(std::uint64_t k) const {
    SeedSpec out = *this;
    out.episode = k;
    return out;
  }
  SeedSpec with_purpose(StreamPurpose p) const {
    SeedSpec out = *this;
    out.purpose = p;
    return out;
  }
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: draw i is a pure function of (key, i), so
/// streams keyed by SeedSpec labels are reproducible regardless of the order
/// in which replicates are scheduled. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(const SeedSpec& spec) noexcept;
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return at(counter_++); }
  result_type at(std::uint64_t counter) const noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return to_unit(operator()()); }
  double uniform_at(std::uint64_t counter) const noexcept { return to_unit(at(counter)); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept { counter_ = counter; }

  static double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace sdmdp
