#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mane/error.hpp"

namespace mane {

struct ScalarOptimum {
  double x;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than `tol`.
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double tol) {
  require(lo <= hi, "golden section: empty bracket");
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  // 200 iterations shrink any finite bracket far below double resolution.
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? ScalarOptimum{x1, f1} : ScalarOptimum{x2, f2};
}

template <class F>
ScalarOptimum golden_section_minimize(F&& f, double lo, double hi, double tol) {
  auto r = golden_section_maximize([&](double x) { return -f(x); }, lo, hi, tol);
  return {r.x, -r.value};
}

/// Uniform scan with `n` points followed by golden-section refinement in the
/// two cells adjacent to each grid-level local minimum. Plateaus are not
/// refined.
template <class F>
ScalarOptimum grid_refined_minimize(F&& f, double lo, double hi, std::size_t n, double tol) {
  require(n >= 2, "grid scan needs at least two points");
  require(lo <= hi, "grid scan: empty interval");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  auto node = [&](std::size_t i) { return i + 1 == n ? hi : lo + h * static_cast<double>(i); };
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = f(node(i));
  ScalarOptimum best{node(0), values[0]};
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] < best.value) best = {node(i), values[i]};
  }
  if (h == 0.0) return best;
  // A grid-level local minimum can hide a deeper true minimum, so every one is refined.
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i + 1 == n || values[i] <= values[i + 1];
    const bool strict = (i > 0 && values[i] < values[i - 1]) || (i + 1 < n && values[i] < values[i + 1]);
    if (!left_ok || !right_ok || !strict) continue;
    const auto refined = golden_section_minimize(f, std::max(lo, node(i) - h), std::min(hi, node(i) + h), tol);
    if (refined.value < best.value) best = refined;
  }
  return best;
}

}  // namespace mane
