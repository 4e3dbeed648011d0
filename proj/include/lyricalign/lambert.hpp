#pragma once

namespace lyricalign {

/// Real branches of the Lambert W function.
enum class LambertBranch { principal = 0, lower = -1 };

/// Returns w with w * exp(w) == x, refined by Halley iteration.
/// principal: x >= -1/e, w >= -1.  lower: -1/e <= x < 0, w <= -1.
/// Throws Error(invalid_input) outside the branch domain.
double lambert_w(double x, LambertBranch branch = LambertBranch::principal);

inline constexpr double kInvE = 0.36787944117144233;  // 1/e

}  // namespace lyricalign
