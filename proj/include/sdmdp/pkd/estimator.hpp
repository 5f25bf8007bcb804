#pragma once

#include <absl/container/flat_hash_map.h>

#include "json.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sdmdp {

/// Empirical kernel at one feature: N(z) and the observed outcomes with
/// their frequencies (ascending outcome order, positive mass only).
struct EffView {
  std::uint64_t count = 0;
  std::span<const std::int64_t> outcomes;
  std::span<const double> probs;
};

/// Power-of-two bookkeeping shared by the estimators: revision() changes
/// whenever some count reaches 1, 2, 4, 8, ...
class RevisionCounter {
 public:
  void touch(std::uint64_t new_count) {
    if ((new_count & (new_count - 1)) == 0) ++revision_;
  }
  std::uint64_t revision() const noexcept { return revision_; }

 private:
  std::uint64_t revision_ = 0;
};

/// Lazy count table N(z), P_eff(z) keyed by feature id.
class EffEstimator {
 public:
  void add(std::uint64_t z, std::int64_t outcome);
  EffView lookup(std::uint64_t z) const;
  std::uint64_t count(std::uint64_t z) const;
  std::size_t num_features() const noexcept { return rows_.size(); }
  std::uint64_t revision() const noexcept { return revision_.revision(); }
  std::uint64_t total() const noexcept { return total_; }

  nlohmann::json snapshot() const;

 private:
  struct Row {
    std::uint64_t count = 0;
    std::vector<std::int64_t> outcomes;
    std::vector<std::uint64_t> hits;
    std::vector<double> probs;
  };
  absl::flat_hash_map<std::uint64_t, Row> rows_;
  RevisionCounter revision_;
  std::uint64_t total_ = 0;
};

}  // namespace sdmdp
