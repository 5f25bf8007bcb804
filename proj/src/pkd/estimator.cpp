#include "sdmdp/pkd/estimator.hpp"

#include <algorithm>
#include <map>

namespace sdmdp {

void EffEstimator::add(std::uint64_t z, std::int64_t outcome) {
  Row& row = rows_[z];
  ++row.count;
  ++total_;
  auto it = std::lower_bound(row.outcomes.begin(), row.outcomes.end(), outcome);
  const auto pos = static_cast<std::size_t>(it - row.outcomes.begin());
  if (it == row.outcomes.end() || *it != outcome) {
    row.outcomes.insert(it, outcome);
    row.hits.insert(row.hits.begin() + static_cast<std::ptrdiff_t>(pos), 0);
  }
  ++row.hits[pos];
  row.probs.resize(row.hits.size());
  const double n = static_cast<double>(row.count);
  for (std::size_t i = 0; i < row.hits.size(); ++i) row.probs[i] = static_cast<double>(row.hits[i]) / n;
  revision_.touch(row.count);
}

EffView EffEstimator::lookup(std::uint64_t z) const {
  auto it = rows_.find(z);
  if (it == rows_.end()) return {};
  return EffView{it->second.count, it->second.outcomes, it->second.probs};
}

std::uint64_t EffEstimator::count(std::uint64_t z) const {
  auto it = rows_.find(z);
  return it == rows_.end() ? 0 : it->second.count;
}

nlohmann::json EffEstimator::snapshot() const {
  std::map<std::uint64_t, const Row*> ordered;
  for (const auto& [z, row] : rows_) ordered.emplace(z, &row);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [z, row] : ordered) {
    out.push_back({{"z", z}, {"count", row->count}, {"outcomes", row->outcomes}, {"hits", row->hits}});
  }
  return out;
}

}  // namespace sdmdp
