#pragma once

#include <algorithm>
#include <cmath>

#include "mane/error.hpp"
#include "mane/tolerances.hpp"

namespace mane {

struct QuadratureOptions {
  double abs_tol = tol::kQuadrature;
  int max_depth = tol::kQuadratureDepth;
};

namespace detail {

template <class F>
double simpson_refine(F& f, double a, double fa, double m, double fm, double b, double fb,
                      double whole, double tol, double floor, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  // Panels below double resolution cannot be split further.
  if (lm == a || rm == b || m == lm || m == rm) return left + right + delta / 15.0;
  if (depth <= 0) {
    fail(ErrorCode::QuadratureFailure,
         "adaptive Simpson reached its depth limit near z=" + std::to_string(m));
  }
  const double next = std::max(0.5 * tol, floor);
  return simpson_refine(f, a, fa, lm, flm, m, fm, left, next, floor, depth - 1) +
         simpson_refine(f, m, fm, rm, frm, b, fb, right, next, floor, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] (b < a allowed, giving the
/// negated integral) with absolute tolerance and a recursion-depth cap.
/// Panel tolerances halve with depth but stop at abs_tol * 2^-20, so square-
/// root kinks at an end point resolve within the depth cap.
template <class F>
double adaptive_simpson(F&& f, double a, double b, QuadratureOptions opts = {}) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_refine(f, a, fa, m, fm, b, fb, whole, opts.abs_tol, std::ldexp(opts.abs_tol, -20),
                                opts.max_depth);
}

}  // namespace mane
