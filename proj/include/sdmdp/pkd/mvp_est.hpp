#pragma once

#include <cstdint>
#include <span>

namespace sdmdp {

inline constexpr double kMvpC1 = 20.0 / 3.0;
inline constexpr double kMvpC2 = 400.0 / 9.0;

/// Var(P, V) = sum_i p_i (V_i - PV)^2 computed in one weighted pass
/// (West's update), clamped at 0.
double weighted_variance(std::span<const double> probs, std::span<const double> values);

/// Optimistic Bernstein-type estimate, capped at H:
///   N <= 1            -> H
///   otherwise         -> min(r + PV + c1 sqrt(Var(P,V) ell / N) + c2 H ell / N, H)
double mvp_est(double reward, std::span<const double> probs, std::span<const double> values,
               std::uint64_t count, double ell, double horizon);

/// log(32 H |Y| |Z| K / delta) min B log(32 H B |Z| K / delta).
double ell_star_generic(double num_y, double num_z, double horizon, double episodes, double delta,
                        double branching);

}  // namespace sdmdp
