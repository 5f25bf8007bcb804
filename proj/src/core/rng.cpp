#include "sdmdp/core/rng.hpp"

namespace sdmdp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(const SeedSpec& spec) noexcept {
  std::uint64_t k = mix64(spec.master_seed + kGolden);
  k = mix64(k ^ (spec.run_id + 0x632BE59BD9B4E019ULL));
  k = mix64(k ^ (spec.episode + 0x8CB92BA72F3D8DD7ULL));
  k = mix64(k ^ (static_cast<std::uint64_t>(spec.purpose) * kGolden));
  key_ = k;
}

CounterRng::result_type CounterRng::at(std::uint64_t counter) const noexcept {
  return mix64(key_ + (counter + 1) * kGolden);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = operator()();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      x = operator()();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace sdmdp
