#pragma once

// Numerical tolerances shared across the library. Individual operations take
// these as defaults; tests and callers may tighten them.

namespace mane::tol {

inline constexpr double kClosedForm = 1e-10;
inline constexpr double kNumeric = 1e-6;

/// Negative discriminants down to this magnitude are treated as roundoff.
inline constexpr double kDiscriminantClamp = 1e-12;

/// Required strict margin of an energy level above the critical value.
inline constexpr double kCriticalMargin = 1e-12;

inline constexpr double kQuadrature = 1e-10;
inline constexpr int kQuadratureDepth = 40;

inline constexpr double kEnergyLevel = 1e-9;
inline constexpr double kEnergyCap = 1e6;

inline constexpr int kCriticalGrid = 2048;
inline constexpr int kBranchTableSize = 4096;

}  // namespace mane::tol
