#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mane/error.hpp"
#include "mane/model.hpp"
#include "mane/quadrature.hpp"
#include "mane/tolerances.hpp"

namespace mane {

/// +1 or -1; ties resolve to +1.
inline int branch_sign(double value) noexcept { return value >= 0.0 ? 1 : -1; }

namespace detail {

inline double clamp_discriminant(double disc, double z, double c) {
  if (disc >= 0.0) return disc;
  if (disc >= -tol::kDiscriminantClamp) return 0.0;
  fail(ErrorCode::BelowCritical, "energy level c=" + std::to_string(c) +
                                     " is below the local critical level at z=" + std::to_string(z));
}

}  // namespace detail

/// Root p of H(z, p) = c on the given branch (+1: larger root, -1: smaller).
inline double gradient_branch(const ProcessModel& model, double z, double c, int branch) {
  if (auto q = quadratic_point(model, z)) {
    const double r = q->grad_potential / q->sigma;
    const double disc = detail::clamp_discriminant(r * r + 2.0 * c, z, c);
    return (r + branch * std::sqrt(disc)) / q->sigma;
  }
  if (const auto* bd = model.get_if<BirthDeath>()) {
    const double lam = bd->birth(z);
    const double mu = bd->death(z);
    if (!(lam > 0.0)) fail(ErrorCode::InvalidArgument, "birth rate vanishes at z=" + std::to_string(z));
    const double half = (c + lam + mu) / (2.0 * lam);
    const double ratio = mu / lam;
    const double disc = detail::clamp_discriminant(half * half - ratio, z, c);
    const double root = std::sqrt(disc);
    // The two roots multiply to mu / lambda; use that for the small one.
    return branch > 0 ? std::log(half + root) : std::log(ratio / (half + root));
  }
  fail(ErrorCode::WrongModel, "Mane potential gradient needs a one-dimensional model");
}

/// d/dc of the branch root: 1 / H_p(z, p), which is branch / (sigma sqrt(disc))
/// for quadratic Hamiltonians and branch / (2 lambda sqrt(disc)) for
/// birth-death. Infinite at a double root.
inline double gradient_energy_slope(const ProcessModel& model, double z, double c, int branch) {
  if (auto q = quadratic_point(model, z)) {
    const double r = q->grad_potential / q->sigma;
    const double disc = detail::clamp_discriminant(r * r + 2.0 * c, z, c);
    return branch / (q->sigma * std::sqrt(disc));
  }
  if (const auto* bd = model.get_if<BirthDeath>()) {
    const double lam = bd->birth(z);
    const double half = (c + lam + bd->death(z)) / (2.0 * lam);
    const double disc = detail::clamp_discriminant(half * half - bd->death(z) / lam, z, c);
    return branch / (2.0 * lam * std::sqrt(disc));
  }
  fail(ErrorCode::WrongModel, "Mane potential gradient needs a one-dimensional model");
}

/// p^c(z) with the branch chosen by sign(z - anchor).
inline double gradient_pc(const ProcessModel& model, double anchor, double z, double c) {
  return gradient_branch(model, z, c, branch_sign(z - anchor));
}

/// S^c(x, y): integral of p^c(.; anchor = x) from x to y. The branch is fixed
/// by sign(y - x) so no panel straddles the anchor.
inline double mane_potential(const ProcessModel& model, double c, double x, double y,
                             QuadratureOptions quad = {}) {
  if (x == y) return 0.0;
  const int branch = branch_sign(y - x);
  return adaptive_simpson([&](double z) { return gradient_branch(model, z, c, branch); }, x, y, quad);
}

/// d/dc S^c(x, y), the integral of the root slope along the same branch.
inline double mane_potential_energy_slope(const ProcessModel& model, double c, double x, double y,
                                          QuadratureOptions quad = {}) {
  if (x == y) return 0.0;
  const int branch = branch_sign(y - x);
  return adaptive_simpson([&](double z) { return gradient_energy_slope(model, z, c, branch); }, x, y, quad);
}

struct Interval {
  double a;
  double b;
  bool operator==(const Interval&) const = default;
};

struct PotentialQuery {
  ProcessModel model;
  Interval interval;
  double c;
  double x;
  double y;
  QuadratureOptions quad{};
};

/// Validated evaluation: checks the interval, c > c_H on it, and that both
/// end points lie in the closed interval.
inline double mane_potential(const PotentialQuery& q) {
  require(q.interval.a < q.interval.b, "potential interval needs a < b");
  require(q.x >= q.interval.a && q.x <= q.interval.b, "anchor outside the working interval");
  require(q.y >= q.interval.a && q.y <= q.interval.b, "target outside the working interval");
  validate_model(q.model, q.interval.a, q.interval.b);
  const double c_h = critical_value(q.model, q.interval.a, q.interval.b);
  if (!(q.c > c_h + tol::kCriticalMargin)) {
    fail(ErrorCode::BelowCritical, "c=" + std::to_string(q.c) + " does not exceed c_H=" + std::to_string(c_h));
  }
  return mane_potential(q.model, q.c, q.x, q.y, q.quad);
}

struct ProfilePoint {
  double z;
  double p;
};

/// Integrand p^c(z; anchor = x) sampled at `points` equispaced nodes from x to y.
inline std::vector<ProfilePoint> potential_profile(const ProcessModel& model, double c, double x, double y,
                                                   std::size_t points) {
  require(points >= 2, "profile needs at least two points");
  const int branch = branch_sign(y - x);
  std::vector<ProfilePoint> out;
  out.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double z = x + (y - x) * static_cast<double>(i) / static_cast<double>(points - 1);
    out.push_back({z, gradient_branch(model, z, c, branch)});
  }
  return out;
}

}  // namespace mane
