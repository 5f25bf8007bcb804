#include "sdmdp/core/categorical.hpp"

#include "sdmdp/core/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace sdmdp {

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  for (int i = 0; i < size(); ++i) {
    if (probs_[static_cast<std::size_t>(i)] > 0.0) support_.push_back(i);
  }
}

Categorical Categorical::from_probabilities(std::vector<double> probs, double tol) {
  if (probs.empty()) throw ValidationError("categorical distribution must be non-empty");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("categorical entry must be finite and non-negative, got " +
                            std::to_string(p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tol) {
    throw ValidationError("categorical entries sum to " + std::to_string(total) + ", expected 1");
  }
  return Categorical(std::move(probs));
}

Categorical Categorical::normalized(std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("cannot normalize weights with zero total");
  for (double& w : weights) {
    if (w < 0.0) throw ValidationError("negative weight");
    w /= total;
  }
  return Categorical(std::move(weights));
}

Categorical Categorical::point_mass(int size, int index) {
  if (index < 0 || index >= size) throw ValidationError("point mass index out of range");
  std::vector<double> p(static_cast<std::size_t>(size), 0.0);
  p[static_cast<std::size_t>(index)] = 1.0;
  return Categorical(std::move(p));
}

int Categorical::sample(double u) const {
  double acc = 0.0;
  for (int i : support_) {
    acc += probs_[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  return support_.back();
}

double Categorical::expectation(std::span<const double> values) const {
  double acc = 0.0;
  for (int i : support_) acc += probs_[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
  return acc;
}

}  // namespace sdmdp
