#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "mane/error.hpp"
#include "mane/model.hpp"
#include "mane/optimize.hpp"
#include "mane/potential.hpp"
#include "mane/tolerances.hpp"

namespace mane {

struct EnergyOptions {
  double bracket_hi = 1.0;
  double cap = tol::kEnergyCap;
  double tol = tol::kEnergyLevel;
  QuadratureOptions quad{};
};

struct EnergyOptimum {
  double c_opt;
  double objective;
  /// Upper end of the final search bracket; the objective decreases beyond it.
  double bracket_hi;
};

/// Lowest admissible energy level, c_H + 1e-9 max(1, |c_H|).
inline double energy_floor(double c_h) { return c_h + tol::kEnergyLevel * std::max(1.0, std::abs(c_h)); }

namespace detail {

/// Doubles hi (measured from c_h) until a backward difference of the concave
/// objective is negative, which certifies the maximizer lies below hi.
template <class F>
double bracket_concave_max(F& f, double c_h, double lo, double hi, double cap) {
  hi = std::max(hi, lo + 1e-6);
  while (true) {
    const double h = 1e-3 * (hi - lo);
    if (f(hi) - f(hi - h) < 0.0) return hi;
    hi = c_h + 2.0 * (hi - c_h);
    if (hi > cap) fail(ErrorCode::Unbounded, "energy objective still increasing at the cap c=" + std::to_string(cap));
  }
}

template <class F>
ScalarOptimum maximize_concave_energy(F& f, double lo, double hi, double tol) {
  auto best = golden_section_maximize(f, lo, hi, tol);
  const double at_floor = f(lo);
  if (at_floor >= best.value) return {lo, at_floor};
  return best;
}

/// Bisection on the decreasing slope of a concave objective inside
/// [a, b]; used to sharpen a golden-section optimum, whose location is only
/// resolved to about sqrt(machine epsilon) on a flat top.
template <class D>
std::optional<double> polish_concave_root(D&& slope, double a, double b) {
  double sa = slope(a);
  double sb = slope(b);
  if (!std::isfinite(sa) || !std::isfinite(sb) || !(sa > 0.0 && sb < 0.0)) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double sm = slope(m);
    if (!std::isfinite(sm)) return std::nullopt;
    (sm > 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Maximizes c -> g_y + S^c(x0, y) - cT over (c_H, infinity). The objective is
/// concave in c, so golden-section search on a certified bracket is exact up
/// to `opts.tol`.
inline EnergyOptimum optimize_c(const ProcessModel& model, double c_h, double x0, double y, double T,
                                double g_y, const EnergyOptions& opts = {}) {
  require(T > 0.0, "optimize_c needs T > 0");
  require(opts.bracket_hi > c_h, "initial bracket must exceed the critical value");
  auto f = [&](double c) { return g_y + mane_potential(model, c, x0, y, opts.quad) - c * T; };
  const double lo = energy_floor(c_h);
  const double hi = detail::bracket_concave_max(f, c_h, lo, opts.bracket_hi, opts.cap);
  auto best = detail::maximize_concave_energy(f, lo, hi, opts.tol);
  if (best.x > lo) {
    const double w = 1e-5 * std::max(1.0, std::abs(best.x));
    auto slope = [&](double c) { return mane_potential_energy_slope(model, c, x0, y, opts.quad) - T; };
    if (auto root = detail::polish_concave_root(slope, std::max(lo, best.x - w), std::min(hi, best.x + w))) {
      const double value = f(*root);
      if (value >= best.value - 1e-12 * std::max(1.0, std::abs(best.value))) best = {*root, value};
    }
  }
  return {best.x, best.value, hi};
}

/// Two-point boundary {a, b} with costs g_a, g_b.
struct Boundary {
  double a;
  double b;
  double g_a = 0.0;
  double g_b = 0.0;

  static Boundary of(const WorkingDomain& d) { return {d.a, d.b, d.g_a, d.g_b}; }
};

struct BoundaryOptimum {
  double y;
  double g;
  double c_opt;
  double objective;
};

struct MinMaxResult {
  double c_h;
  /// inf_y sup_c { g(y) + S^c(x0, y) - cT }.
  double value;
  double c_star;
  double y_star;
  std::array<BoundaryOptimum, 2> per_boundary;  // a, then b
  /// sup_c inf_y { g(y) + S^c(x0, y) - cT }.
  double maxmin_value;
  double maxmin_c;
  double gap;
  double K;

  const BoundaryOptimum& at(double y) const {
    if (per_boundary[0].y == y) return per_boundary[0];
    if (per_boundary[1].y == y) return per_boundary[1];
    fail(ErrorCode::InvalidArgument, "not a boundary point");
  }
};

inline MinMaxResult minmax(const ProcessModel& model, double c_h, double x0, const Boundary& boundary, double T,
                           const EnergyOptions& opts = {}) {
  require(boundary.a < boundary.b, "boundary needs a < b");
  const std::array<std::pair<double, double>, 2> points{{{boundary.a, boundary.g_a}, {boundary.b, boundary.g_b}}};
  MinMaxResult r{};
  r.c_h = c_h;
  double hi = opts.bracket_hi;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto [y, g] = points[i];
    auto opt = optimize_c(model, c_h, x0, y, T, g, opts);
    r.per_boundary[i] = {y, g, opt.c_opt, opt.objective};
    hi = std::max(hi, opt.bracket_hi);
  }
  // Ties go to b.
  const auto& best = r.per_boundary[0].objective < r.per_boundary[1].objective ? r.per_boundary[0] : r.per_boundary[1];
  r.value = best.objective;
  r.c_star = best.c_opt;
  r.y_star = best.y;

  auto inner_min = [&](double c) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [y, g] : points) m = std::min(m, g + mane_potential(model, c, x0, y, opts.quad) - c * T);
    return m;
  };
  auto maxmin = detail::maximize_concave_energy(inner_min, energy_floor(c_h), hi, opts.tol);
  r.maxmin_value = maxmin.value;
  r.maxmin_c = maxmin.x;
  r.gap = r.value - r.maxmin_value;

  double lowest = std::numeric_limits<double>::infinity();
  double own = 0.0;
  for (const auto& [y, g] : points) {
    const double v = g + mane_potential(model, r.c_star, x0, y, opts.quad);
    lowest = std::min(lowest, v);
    if (y == r.y_star) own = v;
  }
  r.K = own - lowest;
  return r;
}

inline MinMaxResult minmax(const ProcessModel& model, const WorkingDomain& domain, const EnergyOptions& opts = {}) {
  domain.validate();
  validate_model(model, domain.a, domain.b);
  return minmax(model, critical_value(model, domain), domain.x0, Boundary::of(domain), domain.T, opts);
}

/// Piecewise-linear table of d(x) = [g_a + S^c(x, a)] - [g_b + S^c(x, b)] used
/// to pick the active boundary branch without per-call quadrature.
class BranchTable {
 public:
  BranchTable(const ProcessModel& model, const WorkingDomain& domain, double c, std::size_t nodes,
              QuadratureOptions quad = {})
      : a_(domain.a), b_(domain.b), values_(nodes) {
    require(nodes >= 2, "branch table needs at least two nodes");
    for (std::size_t i = 0; i < nodes; ++i) {
      const double x = node(i);
      values_[i] = (domain.g_a + mane_potential(model, c, x, domain.a, quad)) -
                   (domain.g_b + mane_potential(model, c, x, domain.b, quad));
    }
  }

  double difference(double x) const noexcept {
    const double h = (b_ - a_) / static_cast<double>(values_.size() - 1);
    const double s = std::clamp((x - a_) / h, 0.0, static_cast<double>(values_.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(s), values_.size() - 2);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  int sign(double x) const noexcept { return branch_sign(difference(x)); }

  std::size_t size() const noexcept { return values_.size(); }

 private:
  double node(std::size_t i) const {
    return i + 1 == values_.size() ? b_ : a_ + (b_ - a_) * static_cast<double>(i) / static_cast<double>(values_.size() - 1);
  }

  double a_;
  double b_;
  std::vector<double> values_;
};

enum class SubsolutionVariant { Uc, UcyK };

constexpr std::string_view to_string(SubsolutionVariant v) { return v == SubsolutionVariant::Uc ? "Uc" : "UcyK"; }

/// One of the two subsolution families built from an energy level c:
///   Uc:   min_y { g(y) + S^c(x, y) } - c (T - t)
///   UcyK: g(y) + S^c(x0, y) - S^c(x0, x) - c (T - t) - K
class Subsolution {
 public:
  static Subsolution uc(ProcessModel model, WorkingDomain domain, double c, QuadratureOptions quad = {}) {
    return Subsolution(SubsolutionVariant::Uc, std::move(model), domain, c, domain.b, 0.0, quad);
  }

  static Subsolution ucyk(ProcessModel model, WorkingDomain domain, double c, double y, double K,
                          QuadratureOptions quad = {}) {
    require(y == domain.a || y == domain.b, "UcyK target must be a boundary point");
    return Subsolution(SubsolutionVariant::UcyK, std::move(model), domain, c, y, K, quad);
  }

  static Subsolution from_minmax(SubsolutionVariant variant, ProcessModel model, WorkingDomain domain,
                                 const MinMaxResult& mm, QuadratureOptions quad = {}) {
    if (variant == SubsolutionVariant::Uc) return uc(std::move(model), domain, mm.c_star, quad);
    return ucyk(std::move(model), domain, mm.c_star, mm.y_star, mm.K, quad);
  }

  /// Copy that resolves the Uc branch through a precomputed table.
  Subsolution with_branch_table(std::size_t nodes = tol::kBranchTableSize) const {
    Subsolution s = *this;
    if (variant_ == SubsolutionVariant::Uc) {
      s.table_ = std::make_shared<const BranchTable>(model_, domain_, c_, nodes, quad_);
    }
    return s;
  }

  SubsolutionVariant variant() const noexcept { return variant_; }
  const ProcessModel& model() const noexcept { return model_; }
  const WorkingDomain& domain() const noexcept { return domain_; }
  double c() const noexcept { return c_; }
  double y() const noexcept { return y_; }
  double K() const noexcept { return K_; }
  double x0() const noexcept { return domain_.x0; }
  const QuadratureOptions& quadrature() const noexcept { return quad_; }
  const BranchTable* branch_table() const noexcept { return table_.get(); }

  /// Active root branch of the spatial gradient at x (ties to +1).
  int branch(double x) const {
    if (variant_ == SubsolutionVariant::UcyK) return branch_sign(x - domain_.x0);
    if (table_) return table_->sign(x);
    return branch_sign(boundary_difference(x));
  }

  double boundary_difference(double x) const {
    return (domain_.g_a + mane_potential(model_, c_, x, domain_.a, quad_)) -
           (domain_.g_b + mane_potential(model_, c_, x, domain_.b, quad_));
  }

 private:
  Subsolution(SubsolutionVariant variant, ProcessModel model, WorkingDomain domain, double c, double y, double K,
              QuadratureOptions quad)
      : variant_(variant), model_(std::move(model)), domain_(domain), c_(c), y_(y), K_(K), quad_(quad) {
    require(domain_.a < domain_.b && domain_.T > 0.0, "subsolution needs a valid domain");
  }

  SubsolutionVariant variant_;
  ProcessModel model_;
  WorkingDomain domain_;
  double c_;
  double y_;
  double K_;
  QuadratureOptions quad_;
  std::shared_ptr<const BranchTable> table_;
};

inline double eval_subsolution(const Subsolution& s, double t, double x) {
  const auto& d = s.domain();
  const double drift = s.c() * (d.T - t);
  if (s.variant() == SubsolutionVariant::Uc) {
    const double via_a = d.g_a + mane_potential(s.model(), s.c(), x, d.a, s.quadrature());
    const double via_b = d.g_b + mane_potential(s.model(), s.c(), x, d.b, s.quadrature());
    return std::min(via_a, via_b) - drift;
  }
  return d.g(s.y()) + mane_potential(s.model(), s.c(), d.x0, s.y(), s.quadrature()) -
         mane_potential(s.model(), s.c(), d.x0, x, s.quadrature()) - drift - s.K();
}

/// Girsanov drift shift theta = -sigma(x) D_x U(t, x) for diffusion models.
inline double control_theta(const Subsolution& s, double /*t*/, double x) {
  const auto* diff = s.model().get_if<Diffusion>();
  if (!diff) fail(ErrorCode::WrongModel, "control_theta needs a diffusion model");
  return diff->sigma(x) * gradient_branch(s.model(), x, s.c(), s.branch(x));
}

struct TiltedRates {
  double birth;
  double death;
};

/// Exponentially tilted birth/death rates; the tilt exponent is the active
/// gradient root, so birth * death is preserved.
inline TiltedRates tilted_rates(const Subsolution& s, double x) {
  const auto* bd = s.model().get_if<BirthDeath>();
  if (!bd) fail(ErrorCode::WrongModel, "tilted_rates needs a birth-death model");
  const double p = gradient_branch(s.model(), x, s.c(), s.branch(x));
  return {bd->birth(x) * std::exp(p), bd->death(x) * std::exp(-p)};
}

/// inf_x { g(x) + t L((y - x) / t) } over [y - radius, y + radius].
template <class L, class G>
double hopf_lax(L&& lagrangian, G&& g, double t, double y, std::size_t x_grid = 2001, double radius = 10.0) {
  require(t > 0.0, "Hopf-Lax needs t > 0");
  require(x_grid >= 3, "Hopf-Lax grid needs at least three points");
  auto cost = [&](double x) { return g(x) + t * lagrangian((y - x) / t); };
  return grid_refined_minimize(cost, y - radius, y + radius, x_grid, 1e-12).value;
}

}  // namespace mane
