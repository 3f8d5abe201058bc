#pragma once

#include <numbers>

namespace emiscan {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kMu0 = 4.0e-7 * kPi; // [T m / A]

} // namespace emiscan
