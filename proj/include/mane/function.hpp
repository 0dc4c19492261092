#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mane {

/// Real polynomial in coefficient-table form, c[0] + c[1] x + c[2] x^2 + ...
/// All model callables (potentials, dispersions, rates) are expressed this
/// way; the named constructors cover the built-in families.
class ScalarFunction {
 public:
  ScalarFunction() = default;
  explicit ScalarFunction(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
    trim();
  }

  static ScalarFunction constant(double value) { return ScalarFunction({value}); }
  static ScalarFunction linear(double slope, double intercept) {
    return ScalarFunction({intercept, slope});
  }
  /// Phi(x) = 1/2 (x^2 - 1)^2.
  static ScalarFunction double_well() { return ScalarFunction({0.5, 0.0, -1.0, 0.0, 0.5}); }
  /// lambda(x) = rho x (1 - x).
  static ScalarFunction sis_infection(double rho) { return ScalarFunction({0.0, rho, -rho}); }

  double operator()(double x) const noexcept {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
    return acc;
  }

  double derivative(double x) const noexcept {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * coeffs_[i];
    return acc;
  }

  ScalarFunction derivative() const {
    if (coeffs_.size() <= 1) return constant(0.0);
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
    return ScalarFunction(std::move(d));
  }

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  bool operator==(const ScalarFunction&) const = default;

 private:
  void trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }

  std::vector<double> coeffs_{0.0};
};

}  // namespace mane
