#pragma once

#include <span>
#include <vector>

namespace sdmdp {

inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite distribution over {0, ..., n-1}. Validated at construction;
/// renormalization happens only through normalized().
class Categorical {
 public:
  Categorical() = default;

  /// Throws ValidationError unless entries are >= 0 and sum to 1 within tol.
  static Categorical from_probabilities(std::vector<double> probs,
                                        double tol = kProbabilityTolerance);
  /// Divides non-negative weights by their sum.
  static Categorical normalized(std::vector<double> weights);
  static Categorical point_mass(int size, int index);

  int size() const noexcept { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  /// Indices with positive mass, ascending.
  std::span<const int> support() const noexcept { return support_; }
  int support_size() const noexcept { return static_cast<int>(support_.size()); }

  /// Inverse-CDF draw over the support from u in [0, 1).
  int sample(double u) const;
  double expectation(std::span<const double> values) const;

  friend bool operator==(const Categorical&, const Categorical&) = default;

 private:
  explicit Categorical(std::vector<double> probs);

  std::vector<double> probs_;
  std::vector<int> support_;
};

}  // namespace sdmdp
