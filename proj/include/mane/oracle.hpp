#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mane/error.hpp"
#include "mane/model.hpp"
#include "mane/potential.hpp"
#include "mane/subsolution.hpp"

namespace mane {

/// Transition rule of the dynamic-programming oracles.
///   NodePair: moves between grid nodes only, so velocities are multiples of dx/dt.
///   Interpolated: NodePair moves plus a uniform velocity fan whose end points
///   are read by linear interpolation; removes the dx/dt velocity quantization.
enum class Stencil { NodePair, Interpolated };

struct GridSpec {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t nx = 401;
  double t_hi = 1.0;
  std::size_t nt = 200;
  double v_max = 8.0;
  Stencil stencil = Stencil::Interpolated;
  std::size_t velocities = 161;

  void validate() const {
    require(nx >= 3, "grid needs nx >= 3");
    require(nt >= 2, "grid needs nt >= 2");
    require(v_max > 0.0, "grid needs v_max > 0");
    require(x_lo < x_hi, "grid needs x_lo < x_hi");
    require(t_hi > 0.0, "grid needs t_hi > 0");
    require(stencil == Stencil::NodePair || velocities >= 3, "interpolated stencil needs >= 3 velocities");
  }

  double dx() const { return (x_hi - x_lo) / static_cast<double>(nx - 1); }
  double dt() const { return t_hi / static_cast<double>(nt); }
  double node(std::size_t i) const { return i + 1 == nx ? x_hi : x_lo + dx() * static_cast<double>(i); }
  std::size_t nearest(double x) const {
    const double s = std::round((x - x_lo) / dx());
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(nx - 1)));
  }
  /// Largest node offset reachable in one step.
  std::size_t reach() const { return static_cast<std::size_t>(std::floor(v_max * dt() / dx() + 1e-9)); }
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Linear interpolation of nodal values at x; infinite neighbours with
/// positive weight propagate.
inline double interpolate(const std::vector<double>& values, const GridSpec& g, double x) {
  if (x < g.x_lo || x > g.x_hi) return kInf;
  const double s = std::min((x - g.x_lo) / g.dx(), static_cast<double>(g.nx - 1));
  const auto i = std::min(static_cast<std::size_t>(s), g.nx - 2);
  const double w = s - static_cast<double>(i);
  if (w == 0.0) return values[i];
  if (w == 1.0) return values[i + 1];
  const double lo = values[i];
  const double hi = values[i + 1];
  if (std::isinf(lo) || std::isinf(hi)) return kInf;
  return (1.0 - w) * lo + w * hi;
}

inline std::vector<double> velocity_fan(const GridSpec& g) {
  std::vector<double> v(g.velocities);
  for (std::size_t k = 0; k < g.velocities; ++k) {
    v[k] = -g.v_max + 2.0 * g.v_max * static_cast<double>(k) / static_cast<double>(g.velocities - 1);
  }
  return v;
}

inline double step_cost(const ProcessModel& model, double from, double to, double dt) {
  return dt * lagrangian(model, 0.5 * (from + to), (to - from) / dt);
}

/// Forward Mather-action DP from node `start`; returns the value layers
/// requested in `layers` (ascending step counts).
inline std::vector<std::vector<double>> forward_action(const ProcessModel& model, const GridSpec& g,
                                                       std::size_t start, const std::vector<std::size_t>& layers) {
  const double dt = g.dt();
  const auto reach = static_cast<std::ptrdiff_t>(g.reach());
  const auto fan = velocity_fan(g);
  const auto nx = static_cast<std::ptrdiff_t>(g.nx);
  std::vector<double> cur(g.nx, kInf);
  std::vector<double> next(g.nx);
  cur[start] = 0.0;
  std::vector<std::vector<double>> out;
  std::size_t want = 0;
  const std::size_t last = layers.empty() ? 0 : layers.back();
  for (std::size_t k = 1; k <= last; ++k) {
    for (std::ptrdiff_t j = 0; j < nx; ++j) {
      const double xj = g.node(static_cast<std::size_t>(j));
      double best = kInf;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, j - reach); i <= std::min(nx - 1, j + reach); ++i) {
        if (std::isinf(cur[static_cast<std::size_t>(i)])) continue;
        const double xi = g.node(static_cast<std::size_t>(i));
        best = std::min(best, cur[static_cast<std::size_t>(i)] + step_cost(model, xi, xj, dt));
      }
      // The first step leaves an exact point, so interpolation adds nothing.
      if (g.stencil == Stencil::Interpolated && k > 1) {
        for (double v : fan) {
          const double from = xj - v * dt;
          const double prev = interpolate(cur, g, from);
          if (std::isinf(prev)) continue;
          best = std::min(best, prev + step_cost(model, from, xj, dt));
        }
      }
      next[static_cast<std::size_t>(j)] = best;
    }
    std::swap(cur, next);
    while (want < layers.size() && layers[want] == k) {
      out.push_back(cur);
      ++want;
    }
  }
  return out;
}

inline std::size_t time_layer(const GridSpec& g, double t) {
  const double s = t / g.dt();
  const double k = std::round(s);
  require(k >= 1.0 && std::abs(s - k) <= 1e-9 * std::max(1.0, s), "t must be a positive multiple of the grid dt");
  require(k <= static_cast<double>(g.nt), "t exceeds the grid horizon");
  return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Grid approximation of M(t, y; x) = inf over paths from x to y in time t of
/// the action. x and y are snapped to the nearest nodes.
inline double mather_action(const ProcessModel& model, const GridSpec& grid, double x, double y, double t) {
  grid.validate();
  const std::size_t k = detail::time_layer(grid, t);
  if (grid.v_max * t < std::abs(y - x)) return detail::kInf;
  const auto layers = detail::forward_action(model, grid, grid.nearest(x), {k});
  return layers.front()[grid.nearest(y)];
}

struct DualityEntry {
  double parameter;  // c for energy rows, t for time rows
  double lhs;
  double rhs;
  double abs_residual;
  double rel_residual;
};

struct DualityReport {
  double c_h;
  /// |S^c(x,y) - min_t {M_grid(t) + ct}| for each c.
  std::vector<DualityEntry> by_energy;
  /// |sup_c {S^c(x,y) - ct} - M_grid(t)| for each t.
  std::vector<DualityEntry> by_time;
  double tolerance;
  bool pass_energy;
  bool pass_time;
  bool pass() const { return pass_energy && pass_time; }
};

/// Compares the Mane potential with the grid Mather action in both duality
/// directions. Residuals are relative to the continuum side; the tolerance is
/// an empirical grid tolerance, not a proven rate.
inline DualityReport duality_check(const ProcessModel& model, double x, double y, const std::vector<double>& t_list,
                                   const std::vector<double>& c_list, const GridSpec& grid, double tolerance = 0.05,
                                   const EnergyOptions& energy = {}) {
  grid.validate();
  require(!t_list.empty(), "duality check needs at least one t");
  DualityReport report{};
  report.c_h = critical_value(model, grid.x_lo, grid.x_hi);
  report.tolerance = tolerance;

  std::vector<std::size_t> layers;
  for (double t : t_list) layers.push_back(detail::time_layer(grid, t));
  std::vector<std::size_t> sorted = layers;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto values = detail::forward_action(model, grid, grid.nearest(x), sorted);
  const std::size_t target = grid.nearest(y);
  std::vector<double> m_grid;
  for (std::size_t k : layers) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin());
    m_grid.push_back(values[pos][target]);
  }

  auto entry = [](double param, double lhs, double rhs) {
    const double abs_res = std::abs(lhs - rhs);
    return DualityEntry{param, lhs, rhs, abs_res, abs_res / std::max(std::abs(lhs), 1e-12)};
  };

  report.pass_time = true;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const auto opt = optimize_c(model, report.c_h, x, y, t_list[i], 0.0, energy);
    report.by_time.push_back(entry(t_list[i], opt.objective, m_grid[i]));
    report.pass_time = report.pass_time && report.by_time.back().rel_residual <= tolerance;
  }
  report.pass_energy = true;
  for (double c : c_list) {
    require(c > report.c_h, "duality check energies must exceed c_H");
    const double s = mane_potential(model, c, x, y, energy.quad);
    double best = detail::kInf;
    for (std::size_t i = 0; i < t_list.size(); ++i) best = std::min(best, m_grid[i] + c * t_list[i]);
    report.by_energy.push_back(entry(c, s, best));
    report.pass_energy = report.pass_energy && report.by_energy.back().rel_residual <= tolerance;
  }
  return report;
}

enum class BoundaryRule { Exit, Terminal };

/// Value function on the (t, x) grid; row k holds time k * dt.
struct ValueTable {
  GridSpec grid;
  std::vector<double> values;

  double at(std::size_t k, std::size_t i) const { return values[k * grid.nx + i]; }
  double at_time_zero(double x) const {
    std::vector<double> row(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(grid.nx));
    return detail::interpolate(row, grid, x);
  }
};

/// Backward DP for the terminal problem (paths end on the boundary exactly at
/// T) or the exit problem (boundary absorbs at cost g at any time up to T).
/// The grid must span [a, b] and [0, T].
inline ValueTable grid_value_function(const ProcessModel& model, const WorkingDomain& domain, const GridSpec& grid,
                                      BoundaryRule rule = BoundaryRule::Exit) {
  grid.validate();
  require(std::abs(grid.x_lo - domain.a) <= 1e-12 && std::abs(grid.x_hi - domain.b) <= 1e-12,
          "value-function grid must span the domain interval");
  require(std::abs(grid.t_hi - domain.T) <= 1e-12 * std::max(1.0, domain.T), "value-function grid must span [0, T]");
  const double dt = grid.dt();
  const auto reach = static_cast<std::ptrdiff_t>(grid.reach());
  const auto fan = detail::velocity_fan(grid);
  const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
  ValueTable table{grid, std::vector<double>((grid.nt + 1) * grid.nx, detail::kInf)};

  std::vector<double> next(grid.nx, detail::kInf);
  next.front() = domain.g_a;
  next.back() = domain.g_b;
  std::copy(next.begin(), next.end(), table.values.begin() + static_cast<std::ptrdiff_t>(grid.nt * grid.nx));
  std::vector<double> cur(grid.nx);

  for (std::size_t k = grid.nt; k-- > 0;) {
    for (std::ptrdiff_t i = 0; i < nx; ++i) {
      const double xi = grid.node(static_cast<std::size_t>(i));
      double best = detail::kInf;
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - reach); j <= std::min(nx - 1, i + reach); ++j) {
        if (std::isinf(next[static_cast<std::size_t>(j)])) continue;
        best = std::min(best, next[static_cast<std::size_t>(j)] +
                                  detail::step_cost(model, xi, grid.node(static_cast<std::size_t>(j)), dt));
      }
      if (grid.stencil == Stencil::Interpolated) {
        for (double v : fan) {
          const double to = xi + v * dt;
          if (to >= domain.a && to <= domain.b) {
            const double after = detail::interpolate(next, grid, to);
            if (!std::isinf(after)) best = std::min(best, after + detail::step_cost(model, xi, to, dt));
          } else if (rule == BoundaryRule::Exit) {
            const double hit = to > domain.b ? domain.b : domain.a;
            const double frac = (hit - xi) / (v * dt);
            best = std::min(best, domain.g(hit) + frac * dt * lagrangian(model, 0.5 * (xi + hit), v));
          }
        }
      }
      cur[static_cast<std::size_t>(i)] = best;
    }
    if (rule == BoundaryRule::Exit) {
      cur.front() = domain.g_a;
      cur.back() = domain.g_b;
    }
    std::copy(cur.begin(), cur.end(), table.values.begin() + static_cast<std::ptrdiff_t>(k * grid.nx));
    std::swap(cur, next);
  }
  return table;
}

}  // namespace mane
