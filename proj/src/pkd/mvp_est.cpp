#include "sdmdp/pkd/mvp_est.hpp"

#include "sdmdp/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sdmdp {

double weighted_variance(std::span<const double> probs, std::span<const double> values) {
  double weight = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double w = probs[i];
    if (w <= 0.0) continue;
    weight += w;
    const double delta = values[i] - mean;
    mean += delta * w / weight;
    m2 += w * delta * (values[i] - mean);
  }
  if (weight <= 0.0) return 0.0;
  return std::max(0.0, m2 / weight);
}

double mvp_est(double reward, std::span<const double> probs, std::span<const double> values,
               std::uint64_t count, double ell, double horizon) {
  if (count <= 1) return horizon;
  double pv = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) pv += probs[i] * values[i];
  const double n = static_cast<double>(count);
  const double var = weighted_variance(probs, values);
  const double est = reward + pv + kMvpC1 * std::sqrt(var * ell / n) + kMvpC2 * horizon * ell / n;
  return std::min(est, horizon);
}

double ell_star_generic(double num_y, double num_z, double horizon, double episodes, double delta,
                        double branching) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (num_y <= 0 || num_z <= 0 || horizon <= 0 || episodes <= 0 || branching <= 0) {
    throw ValidationError("log-term arguments must be positive");
  }
  const double first = std::log(32.0 * horizon * num_y * num_z * episodes / delta);
  const double second = branching * std::log(32.0 * horizon * branching * num_z * episodes / delta);
  return std::min(first, second);
}

}  // namespace sdmdp
