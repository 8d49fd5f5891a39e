#pragma once

#include <numbers>

namespace qrad::constants {

// SI 2019 exact values.
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

inline constexpr double pi = std::numbers::pi;

}  // namespace qrad::constants
