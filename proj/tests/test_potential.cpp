#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "mane/potential.hpp"
#include "mane/quadrature.hpp"
#include "oracles.hpp"

using namespace mane;

TEST(Quadrature, PolynomialsAndOrientation) {
  EXPECT_NEAR(adaptive_simpson([](double x) { return x * x * x; }, 0.0, 2.0), 4.0, 1e-12);
  EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(x); }, 1.0, 0.0), 1.0 - std::exp(1.0), 1e-10);
  EXPECT_EQ(adaptive_simpson([](double) { return 1.0; }, 0.5, 0.5), 0.0);
}

TEST(Quadrature, SquareRootKink) {
  // Integrable endpoint singularity in the derivative.
  EXPECT_NEAR(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0), 2.0 / 3.0, 1e-9);
}

TEST(Quadrature, DepthLimitIsReported) {
  QuadratureOptions tight{1e-14, 3};
  try {
    adaptive_simpson([](double x) { return std::sin(50.0 * x); }, 0.0, 3.0, tight);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuadratureFailure);
  }
}

TEST(Gradient, DoubleWellUphillAtZeroEnergy) {
  // DPhi(1.2) = 2 * 1.2 * (1.44 - 1) = 1.056, so p = 2 DPhi.
  const double p = gradient_pc(ProcessModel::double_well(), 1.0, 1.2, 0.0);
  EXPECT_NEAR(p, 2.112, 1e-12);
  // Below the anchor the branch flips: DPhi(0.9) = -0.342 and p = 2 DPhi again.
  // Moving up while DPhi < 0 is free at zero energy.
  EXPECT_NEAR(gradient_pc(ProcessModel::double_well(), 0.5, 0.6, 0.0), 0.0, 1e-12);
}

TEST(Gradient, StateIndependentRoot) {
  const auto m = ProcessModel::drifted_brownian(1.0);
  for (double c : {-0.4, 0.0, 0.3, 2.0}) {
    EXPECT_NEAR(gradient_pc(m, 0.0, 0.5, c), -1.0 + std::sqrt(1.0 + 2.0 * c), 1e-12);
    EXPECT_NEAR(gradient_pc(m, 0.0, -0.5, c), -1.0 - std::sqrt(1.0 + 2.0 * c), 1e-12);
  }
}

TEST(Gradient, BalancedBirthDeathAtZeroEnergy) {
  const auto m = ProcessModel::birth_death(ScalarFunction::constant(1.0), ScalarFunction::constant(1.0));
  EXPECT_NEAR(gradient_pc(m, 0.0, 0.5, 0.0), 0.0, 1e-12);
}

TEST(Gradient, TieAtAnchorUsesUpperRoot) {
  const auto m = ProcessModel::drifted_brownian(1.0);
  EXPECT_EQ(gradient_pc(m, 0.3, 0.3, 0.5), gradient_branch(m, 0.3, 0.5, +1));
}

TEST(Gradient, BelowCriticalIsAnError) {
  try {
    gradient_pc(ProcessModel::drifted_brownian(1.0), 0.0, 1.0, -0.6);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BelowCritical);
  }
  // Within the clamp window the discriminant is treated as zero.
  EXPECT_NEAR(gradient_pc(ProcessModel::drifted_brownian(1.0), 0.0, 1.0, -0.5 - 1e-13), -1.0, 1e-6);
}

TEST(Gradient, BirthDeathRejectsVanishingBirthRate) {
  const auto m = ProcessModel::sis(3.0);
  EXPECT_THROW(gradient_pc(m, 0.5, 1.0, 0.1), Error);
  EXPECT_THROW(gradient_pc(ProcessModel::pure_birth({ScalarFunction::constant(1.0)}), 0.0, 1.0, 0.1), Error);
}

TEST(Potential, ZeroOnDiagonal) {
  EXPECT_EQ(mane_potential(ProcessModel::double_well(), 0.3, 0.7, 0.7), 0.0);
  EXPECT_EQ(mane_potential(ProcessModel::sis(3.0), 0.3, 0.6, 0.6), 0.0);
}

TEST(Potential, StateIndependentClosedForm) {
  const auto m = ProcessModel::drifted_brownian(1.0);
  for (double c : {-0.3, 0.0, 0.105, 1.0}) {
    EXPECT_NEAR(mane_potential(m, c, 0.0, 1.1), 1.1 * (-1.0 + std::sqrt(1.0 + 2.0 * c)), 1e-10);
    EXPECT_NEAR(mane_potential(m, c, 0.0, -1.2), oracle::quadratic_potential(1.0, 1.0, c, 0.0, -1.2), 1e-10);
  }
}

TEST(Potential, DoubleWellMatchesFixedPanelSimpson) {
  const double ref = oracle::double_well_potential(0.5, 1.0, 1.42);
  EXPECT_NEAR(mane_potential(ProcessModel::double_well(), 0.5, 1.0, 1.42), ref, 1e-8);
  const double down = oracle::double_well_potential(0.5, 1.0, -1.42);
  EXPECT_NEAR(mane_potential(ProcessModel::double_well(), 0.5, 1.0, -1.42), down, 1e-8);
}

TEST(Potential, SisQuasiPotential) {
  // At c = 0 the upper root is log(mu / lambda) right of 2/3.
  const auto m = ProcessModel::sis(3.0);
  for (double y : {0.7, 0.75, 5.0 / 6.0}) {
    EXPECT_NEAR(mane_potential(m, 0.0, 2.0 / 3.0, y), oracle::sis_quasi_potential(2.0 / 3.0, y), 1e-8);
  }
}

TEST(Potential, ValidatedQueryChecks) {
  const auto m = ProcessModel::double_well();
  const Interval omega{-1.42, 1.42};
  EXPECT_NEAR(mane_potential(PotentialQuery{m, omega, 0.5, 1.0, 1.42}),
              mane_potential(m, 0.5, 1.0, 1.42), 0.0);
  auto code_of = [](const PotentialQuery& q) {
    try {
      mane_potential(q);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  EXPECT_EQ(code_of({m, omega, 0.0, 1.0, 1.2}), ErrorCode::BelowCritical);
  EXPECT_EQ(code_of({m, omega, 0.5, 1.0, 1.5}), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of({m, {1.0, 1.0}, 0.5, 1.0, 1.0}), ErrorCode::InvalidArgument);
  // Off the equilibria c_H < 0, so c = 0 is admissible there.
  EXPECT_NO_THROW(mane_potential(PotentialQuery{m, {1.1, 1.4}, 0.0, 1.1, 1.3}));
}

TEST(Potential, EnergySlopeMatchesFiniteDifference) {
  const double h = 1e-5;
  const auto dw = ProcessModel::double_well();
  const auto sis = ProcessModel::sis(3.0);
  for (double c : {0.05, 0.3, 1.0}) {
    for (auto [x, y] : {std::pair{1.0, 1.42}, std::pair{1.0, -1.42}, std::pair{0.2, 0.9}}) {
      const double fd = (mane_potential(dw, c + h, x, y) - mane_potential(dw, c - h, x, y)) / (2.0 * h);
      EXPECT_NEAR(mane_potential_energy_slope(dw, c, x, y), fd, 1e-6) << c << " " << x << " " << y;
    }
    const double fd = (mane_potential(sis, c + h, 0.67, 0.5) - mane_potential(sis, c - h, 0.67, 0.5)) / (2.0 * h);
    EXPECT_NEAR(mane_potential_energy_slope(sis, c, 0.67, 0.5), fd, 1e-6);
  }
}

TEST(Potential, ProfileSamplesTheIntegrand) {
  const auto m = ProcessModel::double_well();
  const auto prof = potential_profile(m, 0.5, 1.0, 1.42, 5);
  ASSERT_EQ(prof.size(), 5u);
  EXPECT_DOUBLE_EQ(prof.front().z, 1.0);
  EXPECT_DOUBLE_EQ(prof.back().z, 1.42);
  for (const auto& pt : prof) EXPECT_NEAR(pt.p, oracle::double_well_gradient(pt.z, 0.5, 1), 1e-12);
  EXPECT_THROW(potential_profile(m, 0.5, 1.0, 1.42, 1), Error);
}
