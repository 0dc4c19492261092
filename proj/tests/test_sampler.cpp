#include <gtest/gtest.h>

#include <cmath>

#include "mane/random.hpp"
#include "mane/sampler.hpp"

using namespace mane;

namespace {

const WorkingDomain kTable1{-1.42, 1.42, 1.0, 0.25, 0.0, 0.0};
const WorkingDomain kTable2{0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5, 0.0, 0.0};

SimConfig double_well_run(bool controlled) {
  SimConfig c;
  c.model = ProcessModel::double_well();
  c.domain = kTable1;
  c.epsilon = 0.09;
  c.dt = 0.25e-3;
  c.batches = 4;
  c.samples_per_batch = 250;
  c.seed = 99;
  if (controlled) {
    c.subsolution = Subsolution::from_minmax(SubsolutionVariant::UcyK, c.model, c.domain, minmax(c.model, c.domain));
  }
  return c;
}

SimConfig sis_run(bool controlled, std::size_t n = 50) {
  SimConfig c;
  c.model = ProcessModel::sis(3.0);
  c.n = n;
  c.domain = kTable2;
  c.domain.x0 = snap_to_lattice(c.domain.x0, n);
  c.batches = 4;
  c.samples_per_batch = 250;
  c.seed = 5;
  if (controlled) {
    c.subsolution = Subsolution::from_minmax(SubsolutionVariant::UcyK, c.model, c.domain, minmax(c.model, c.domain));
  }
  return c;
}

}  // namespace

TEST(Philox, KnownAnswerForZeroKeyAndCounter) {
  Philox rng(0, 0);
  EXPECT_EQ(rng(), 0x6627e8d5u);
  EXPECT_EQ(rng(), 0xe169c58du);
  EXPECT_EQ(rng(), 0xbc57ac4cu);
  EXPECT_EQ(rng(), 0x9b00dbd8u);
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  Philox a(7, stream_id(3, 11)), b(7, stream_id(3, 11)), c(7, stream_id(3, 12));
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
}

TEST(Philox, VariateMoments) {
  Philox rng(1, 2);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, se = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential(2.0);
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
  EXPECT_NEAR(se / n, 0.5, 0.005);
}

TEST(Girsanov, ConstantControlWithoutNoise) {
  EXPECT_DOUBLE_EQ(girsanov_increment(0.7, 0.0, 0.01, 0.09), -0.49 * 0.01 / 0.18);
  EXPECT_EQ(girsanov_increment(0.0, 0.3, 0.01, 0.09), 0.0);
}

TEST(DiffusionPath, StandardMonteCarloHasUnitWeight) {
  const PreparedRun run(double_well_run(false));
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(run.path(0, i).log_weight, 0.0);
}

TEST(DiffusionPath, ExitTimesAndWeights) {
  const PreparedRun run(double_well_run(true));
  for (std::size_t i = 0; i < 200; ++i) {
    const auto rec = run.path(1, i);
    EXPECT_TRUE(std::isfinite(rec.log_weight));
    EXPECT_LE(rec.exit_time, kTable1.T);
    if (rec.exited) {
      EXPECT_FALSE(kTable1.contains(rec.final_state));
    }
  }
}

TEST(BirthDeathPath, UntiltedHasUnitWeightAndStaysOnLattice) {
  const PreparedRun run(sis_run(false));
  for (std::size_t i = 0; i < 200; ++i) {
    const auto rec = run.path(0, i);
    EXPECT_EQ(rec.log_weight, 0.0);
    EXPECT_LE(rec.exit_time, kTable2.T);
    const double k = rec.final_state * 50.0;
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(BirthDeathPath, JumpWeightsAreTheTiltExponent) {
  const auto cfg = sis_run(true);
  const auto rates = LatticeRates::build(cfg);
  for (std::size_t k = 26; k <= 41; ++k) {
    const double x = k / 50.0;
    const double p = gradient_branch(cfg.model, x, cfg.subsolution->c(), cfg.subsolution->branch(x));
    EXPECT_NEAR(rates.up_log[k], -p, 1e-12);
    EXPECT_NEAR(rates.down_log[k], p, 1e-12);
    EXPECT_NEAR(rates.up[k] * rates.down[k], 2500.0 * 3.0 * x * (1.0 - x) * x, 1e-9);
  }
}

TEST(BirthDeathPath, AbsorbingStateStalls) {
  SimConfig c;
  c.model = ProcessModel::birth_death(ScalarFunction::linear(1.0, 0.0), ScalarFunction::linear(1.0, 0.0));
  c.n = 10;
  c.domain = {-0.5, 0.5, 0.0, 1.0, 0.0, 0.0};
  c.event = EventRule::TerminalOutside;
  const auto rec = PreparedRun(c).path(0, 0);
  EXPECT_TRUE(rec.stalled);
  EXPECT_FALSE(rec.exited);
}

TEST(Estimate, NoExitsIsDegenerate) {
  SimConfig c;
  c.model = ProcessModel::double_well();
  c.domain = {-3.0, 3.0, 1.0, 0.01, 0.0, 0.0};
  c.epsilon = 1e-3;
  c.dt = 1e-4;
  c.batches = 2;
  c.samples_per_batch = 100;
  const auto e = estimate(c);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.rel_err, 0.0);
  EXPECT_TRUE(e.degenerate);
}

TEST(Estimate, MeanIsAverageOfBatchMeans) {
  const auto e = estimate(sis_run(true));
  double acc = 0.0;
  for (double b : e.batch_means) acc += b;
  EXPECT_DOUBLE_EQ(e.mean, acc / e.batch_means.size());
  EXPECT_EQ(e.total_samples, 1000u);
  EXPECT_GE(e.rel_err, 0.0);
  EXPECT_EQ(e.seed, 5u);
}

TEST(Estimate, DeterministicAcrossWorkerCounts) {
  for (auto cfg : {double_well_run(true), sis_run(true)}) {
    cfg.threads = 1;
    const auto one = estimate(cfg);
    cfg.threads = 8;
    const auto eight = estimate(cfg);
    EXPECT_EQ(one.batch_means, eight.batch_means);
    EXPECT_EQ(one.mean, eight.mean);
  }
}

TEST(Estimate, UcControlUsesBranchTable) {
  auto cfg = double_well_run(false);
  cfg.subsolution = Subsolution::from_minmax(SubsolutionVariant::Uc, cfg.model, cfg.domain,
                                             minmax(cfg.model, cfg.domain));
  const PreparedRun run(cfg);
  ASSERT_NE(run.config().subsolution->branch_table(), nullptr);
  const auto e = estimate(cfg);
  EXPECT_GT(e.hits, 0u);
}

TEST(Estimate, LikelihoodRatioOfDriftedBrownianIsOne) {
  SimConfig c;
  c.model = ProcessModel::drifted_brownian(1.0);
  c.domain = {0.5, 1.5, 0.9, 1.0, 0.0, 0.0};
  c.epsilon = 0.2;
  c.dt = 1e-2;
  c.batches = 20;
  c.samples_per_batch = 1000;
  c.stop_at_exit = false;
  c.estimand = Estimand::LikelihoodRatio;
  c.subsolution = Subsolution::from_minmax(SubsolutionVariant::UcyK, c.model, c.domain, minmax(c.model, c.domain));
  const auto e = estimate(c);
  EXPECT_NEAR(e.mean, 1.0, 4.0 * e.std_error());
}

TEST(SimConfig, Validation) {
  auto c = double_well_run(false);
  c.batches = 1;
  EXPECT_THROW(estimate(c), Error);
  c = double_well_run(false);
  c.dt = 0.3;
  EXPECT_THROW(estimate(c), Error);
  c = double_well_run(false);
  c.epsilon = 0.0;
  EXPECT_THROW(estimate(c), Error);
  auto b = sis_run(false);
  b.n = 0;
  EXPECT_THROW(estimate(b), Error);
  auto mixed = sis_run(false);
  mixed.subsolution = double_well_run(true).subsolution;
  EXPECT_THROW(estimate(mixed), Error);
}

TEST(Lattice, SnapRoundsToNearest) {
  EXPECT_DOUBLE_EQ(snap_to_lattice(2.0 / 3.0, 100), 0.67);
  EXPECT_DOUBLE_EQ(snap_to_lattice(2.0 / 3.0, 300), 2.0 / 3.0);
  EXPECT_LE(std::abs(snap_to_lattice(0.123456, 7) - 0.123456), 0.5 / 7.0);
}
