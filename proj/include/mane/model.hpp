#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mane/error.hpp"
#include "mane/function.hpp"
#include "mane/optimize.hpp"
#include "mane/tolerances.hpp"

namespace mane {

enum class ModelKind { Diffusion, BirthDeath, PureBirth, StateIndependent };

/// dX = -Phi'(X) dt + sqrt(eps) sigma(X) dB.
struct Diffusion {
  ScalarFunction potential;
  ScalarFunction sigma;
  bool operator==(const Diffusion&) const = default;
};

/// Jumps of +-1/n at rates n lambda(x), n mu(x).
struct BirthDeath {
  ScalarFunction birth;
  ScalarFunction death;
  bool operator==(const BirthDeath&) const = default;
};

/// n-dimensional pure birth process with separable rates lambda_j(x) = rates[j](x_j).
struct PureBirth {
  std::vector<ScalarFunction> rates;
  bool operator==(const PureBirth&) const = default;
};

/// H(p) = drift p + variance p^2 / 2, independent of x.
struct QuadraticHamiltonian {
  double drift = 0.0;
  double variance = 1.0;
  bool operator==(const QuadraticHamiltonian&) const = default;
};

class ProcessModel {
 public:
  using Data = std::variant<Diffusion, BirthDeath, PureBirth, QuadraticHamiltonian>;

  ProcessModel() : data_(QuadraticHamiltonian{}) {}
  explicit ProcessModel(Data data) : data_(std::move(data)) {}

  static ProcessModel diffusion(ScalarFunction potential, ScalarFunction sigma) {
    return ProcessModel(Diffusion{std::move(potential), std::move(sigma)});
  }
  static ProcessModel birth_death(ScalarFunction birth, ScalarFunction death) {
    return ProcessModel(BirthDeath{std::move(birth), std::move(death)});
  }
  static ProcessModel pure_birth(std::vector<ScalarFunction> rates) {
    return ProcessModel(PureBirth{std::move(rates)});
  }
  static ProcessModel state_independent(double drift, double variance) {
    require(variance > 0.0, "state-independent Hamiltonian needs positive variance");
    return ProcessModel(QuadraticHamiltonian{drift, variance});
  }

  static ProcessModel double_well() {
    return diffusion(ScalarFunction::double_well(), ScalarFunction::constant(1.0));
  }
  static ProcessModel sis(double rho) {
    return birth_death(ScalarFunction::sis_infection(rho), ScalarFunction::linear(1.0, 0.0));
  }
  /// dX = drift dt + sqrt(eps) dB as a diffusion, Phi(x) = -drift x.
  static ProcessModel drifted_brownian(double drift) {
    return diffusion(ScalarFunction::linear(-drift, 0.0), ScalarFunction::constant(1.0));
  }

  ModelKind kind() const noexcept {
    switch (data_.index()) {
      case 0: return ModelKind::Diffusion;
      case 1: return ModelKind::BirthDeath;
      case 2: return ModelKind::PureBirth;
      default: return ModelKind::StateIndependent;
    }
  }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&data_);
  }

  const Data& data() const noexcept { return data_; }

  bool operator==(const ProcessModel&) const = default;

 private:
  Data data_;
};

constexpr std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Diffusion: return "diffusion";
    case ModelKind::BirthDeath: return "birth_death";
    case ModelKind::PureBirth: return "pure_birth";
    case ModelKind::StateIndependent: return "state_independent";
  }
  return "unknown";
}

/// Interval (a, b), start point, horizon and boundary cost g on {a, b}.
struct WorkingDomain {
  double a = 0.0;
  double b = 1.0;
  double x0 = 0.5;
  double T = 1.0;
  double g_a = 0.0;
  double g_b = 0.0;

  double g(double y) const noexcept { return y == a ? g_a : g_b; }
  bool contains(double x) const noexcept { return a < x && x < b; }

  void validate() const {
    require(a < b, "domain needs a < b");
    require(a < x0 && x0 < b, "domain needs a < x0 < b");
    require(T > 0.0, "domain needs T > 0");
    require(std::isfinite(g_a) && std::isfinite(g_b), "boundary cost must be finite");
  }

  bool operator==(const WorkingDomain&) const = default;
};

/// Local coefficients of a model with a quadratic Hamiltonian,
/// H(x, p) = -grad_potential p + sigma^2 p^2 / 2.
struct QuadraticPoint {
  double grad_potential;
  double sigma;
};

inline std::optional<QuadraticPoint> quadratic_point(const ProcessModel& model, double x) {
  if (const auto* d = model.get_if<Diffusion>()) return QuadraticPoint{d->potential.derivative(x), d->sigma(x)};
  if (const auto* q = model.get_if<QuadraticHamiltonian>()) return QuadraticPoint{-q->drift, std::sqrt(q->variance)};
  return std::nullopt;
}

inline double hamiltonian(const ProcessModel& model, double x, double p) {
  if (auto q = quadratic_point(model, x)) {
    const double sp = q->sigma * p;
    return -q->grad_potential * p + 0.5 * sp * sp;
  }
  if (const auto* bd = model.get_if<BirthDeath>()) {
    return bd->death(x) * std::expm1(-p) + bd->birth(x) * std::expm1(p);
  }
  fail(ErrorCode::WrongModel, "pure-birth Hamiltonian needs vector arguments");
}

/// H(x, p) = sum_j lambda_j(x_j) (e^{p_j} - 1) for the pure-birth family.
inline double hamiltonian(const ProcessModel& model, std::span<const double> x, std::span<const double> p) {
  const auto* pb = model.get_if<PureBirth>();
  if (!pb) fail(ErrorCode::WrongModel, "vector Hamiltonian is defined for pure-birth models only");
  require(x.size() == pb->rates.size() && p.size() == pb->rates.size(), "dimension mismatch");
  double h = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) h += pb->rates[j](x[j]) * std::expm1(p[j]);
  return h;
}

/// Numerical Fenchel-Legendre transform sup_p { p v - H(p) } of a convex H.
/// The bracket [-radius, radius] doubles until the maximizer is interior.
template <class H>
double legendre_transform(H&& h, double v, double radius = 1.0, double radius_cap = 1e4) {
  require(radius > 0.0, "search radius must be positive");
  auto objective = [&](double p) {
    const double value = p * v - h(p);
    return std::isnan(value) ? -std::numeric_limits<double>::infinity() : value;
  };
  for (double r = radius; r <= radius_cap; r *= 2.0) {
    auto best = golden_section_maximize(objective, -r, r, 1e-10 * r);
    if (std::abs(best.x) < r * (1.0 - 1e-6)) return best.value;
  }
  fail(ErrorCode::NonConvex, "Legendre maximizer escaped every bracket up to radius " +
                                 std::to_string(radius_cap));
}

enum class LegendreMode { ClosedForm, Numeric };

inline double lagrangian(const ProcessModel& model, double x, double v, double search_radius = 1.0,
                         LegendreMode mode = LegendreMode::ClosedForm) {
  require(search_radius > 0.0, "search radius must be positive");
  if (model.kind() == ModelKind::PureBirth) {
    fail(ErrorCode::WrongModel, "scalar Lagrangian is not defined for pure-birth models");
  }
  if (mode == LegendreMode::Numeric) {
    return legendre_transform([&](double p) { return hamiltonian(model, x, p); }, v, search_radius);
  }
  if (auto q = quadratic_point(model, x)) {
    const double dv = v + q->grad_potential;
    return dv * dv / (2.0 * q->sigma * q->sigma);
  }
  const auto& bd = *model.get_if<BirthDeath>();
  const double lam = bd.birth(x);
  const double mu = bd.death(x);
  if (v == 0.0) {
    const double d = std::sqrt(lam) - std::sqrt(mu);
    return d * d;
  }
  if ((v > 0.0 && lam <= 0.0) || (v < 0.0 && mu <= 0.0)) return std::numeric_limits<double>::infinity();
  // Maximizer of p v - H: e^p = (v + sqrt(v^2 + 4 lam mu)) / (2 lam).
  const double root = std::sqrt(v * v + 4.0 * lam * mu);
  const double p = v > 0.0 ? std::log((v + root) / (2.0 * lam)) : std::log(2.0 * mu / (root - v));
  return p * v - (mu * std::expm1(-p) + lam * std::expm1(p));
}

/// Checks positivity of sigma (diffusion) or of both rates (birth-death) on
/// the working interval.
inline void validate_model(const ProcessModel& model, double a, double b, std::size_t samples = 257) {
  require(a < b, "interval needs a < b");
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(samples - 1);
    if (const auto* d = model.get_if<Diffusion>()) {
      require(d->sigma(x) > 0.0, "sigma must be positive on the working interval");
    } else if (const auto* bd = model.get_if<BirthDeath>()) {
      const bool interior = i != 0 && i + 1 != samples;
      if (interior) {
        require(bd->birth(x) > 0.0 && bd->death(x) > 0.0,
                "birth and death rates must be positive inside the working interval");
      }
    } else if (const auto* pb = model.get_if<PureBirth>()) {
      for (const auto& rate : pb->rates) require(rate(x) >= 0.0, "pure-birth rates must be nonnegative");
    }
  }
}

/// Mane critical value sup_x inf_p H(x, p) for the supported families, with
/// the infimum over x taken on [a, b] (grid scan plus golden refinement).
inline double critical_value(const ProcessModel& model, double a, double b,
                             std::size_t grid_n = tol::kCriticalGrid) {
  require(grid_n >= 2, "critical value grid needs at least two points");
  require(a <= b, "critical value interval is empty");
  constexpr double kRefine = 1e-12;
  if (const auto* q = model.get_if<QuadraticHamiltonian>()) {
    return -q->drift * q->drift / (2.0 * q->variance);
  }
  if (const auto* d = model.get_if<Diffusion>()) {
    auto ratio = [&](double x) {
      const double r = d->potential.derivative(x) / d->sigma(x);
      return r * r;
    };
    return -0.5 * grid_refined_minimize(ratio, a, b, grid_n, kRefine).value;
  }
  if (const auto* bd = model.get_if<BirthDeath>()) {
    auto gap = [&](double x) {
      const double g = std::sqrt(std::max(0.0, bd->death(x))) - std::sqrt(std::max(0.0, bd->birth(x)));
      return g * g;
    };
    return -grid_refined_minimize(gap, a, b, grid_n, kRefine).value;
  }
  const auto& pb = *model.get_if<PureBirth>();
  double total = 0.0;
  for (const auto& rate : pb.rates) total += grid_refined_minimize(rate, a, b, grid_n, kRefine).value;
  return -total;
}

inline double critical_value(const ProcessModel& model, const WorkingDomain& domain,
                             std::size_t grid_n = tol::kCriticalGrid) {
  return critical_value(model, domain.a, domain.b, grid_n);
}

}  // namespace mane
