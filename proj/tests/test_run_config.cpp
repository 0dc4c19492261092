#include <gtest/gtest.h>

#include <sstream>

#include "mane/experiments.hpp"
#include "mane/run_config.hpp"

using namespace mane;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_run_config(serialize(c)), c);
}

TEST(RunConfig, EveryFamilyRoundTrips) {
  for (const std::string body : {
           R"({"family":"double_well"})",
           R"({"family":"drifted_brownian","drift":0.25})",
           R"({"family":"diffusion","potential":[0,0,0.5],"sigma":[1.5]})",
           R"({"family":"sis","rho":2.5})",
           R"({"family":"birth_death","birth":[1,0.1],"death":[0.5,1]})",
           R"({"family":"state_independent","drift":1,"variance":2})",
       }) {
    const auto c = parse_run_config(R"({"schema_version":1,"domain":{"a":0.1,"b":0.9,"x0":0.5},"model":)" + body +
                                    R"(,"n":[10,20]})");
    const auto again = parse_run_config(serialize(c));
    EXPECT_EQ(again, c) << body;
    EXPECT_EQ(config_hash(again), config_hash(c));
  }
}

TEST(RunConfig, ParsesShippedConfigs) {
  const auto t1 = load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/table1.json");
  EXPECT_EQ(t1.epsilon, (std::vector<double>{0.09, 0.05, 0.03}));
  EXPECT_EQ(t1.T.size(), 4u);
  EXPECT_EQ(t1.sampling.samples_per_batch, 10000u);
  const auto t2 = load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/table2.json");
  EXPECT_EQ(t2.n.front(), 100u);
  EXPECT_EQ(t2.model.build(), ProcessModel::sis(3.0));
  for (const char* name : {"duality.json", "example_gap.json"}) {
    EXPECT_NO_THROW(load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/" + name)) << name;
  }
}

TEST(RunConfig, RejectsUnknownKeysEverywhere) {
  EXPECT_EQ(code_of(R"({"schema_version":1,"model":{"family":"double_well"},"bogus":1})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"schema_version":1,"model":{"family":"double_well","rho":3}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"sampling":{"batch":3}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"grid":{"nx":3,"dx":1}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"domain":{"c":1}})"), ErrorCode::ConfigError);
}

TEST(RunConfig, RejectsMalformedDocuments) {
  EXPECT_EQ(code_of("{not json"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"schema_version":2,"model":{"family":"double_well"}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"schema_version":1})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"quartic"}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"method":"fancy"})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"epsilon":"small"})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"epsilon":[-0.1]})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"T":[]})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"double_well"},"sampling":{"batches":1}})"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of(R"({"model":{"family":"diffusion","potential":[1]}})"), ErrorCode::ConfigError);
  // SIS birth rate vanishes at 1, inside this interval.
  EXPECT_EQ(code_of(R"({"model":{"family":"sis"},"domain":{"a":0.5,"b":1.5,"x0":0.7},"n":[10]})"),
            ErrorCode::ConfigError);
}

TEST(RunConfig, HashTracksContent) {
  RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.sampling.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunConfig, DeskScaleUsesConfiguredBudget) {
  RunConfig c;
  c.sampling.desk_batches = 10;
  c.sampling.desk_samples_per_batch = 500;
  c.apply_desk_scale();
  EXPECT_EQ(c.sampling.batches, 10u);
  EXPECT_EQ(c.sampling.samples_per_batch, 500u);
}

TEST(Experiments, BirthDeathCellsSnapTheStartPoint) {
  auto c = load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/table2.json");
  const auto sim = build_sim(c, 100, 0.5);
  EXPECT_DOUBLE_EQ(sim.domain.x0, 0.67);
  EXPECT_EQ(sim.n, 100u);
  ASSERT_TRUE(sim.subsolution.has_value());
  EXPECT_EQ(sim.subsolution->x0(), 0.67);
}

TEST(Experiments, SweepRowsCarrySeedAndHash) {
  auto c = load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/table2.json");
  c.n = {60};
  c.sampling.batches = 2;
  c.sampling.samples_per_batch = 50;
  const auto rows = run_table2(c);
  ASSERT_EQ(rows.size(), 1u);
  std::ostringstream os;
  write_sweep_csv(os, c, rows);
  const std::string text = os.str();
  EXPECT_NE(text.find("seed,config_hash"), std::string::npos);
  EXPECT_NE(text.find(std::to_string(c.sampling.seed) + "," + hex(config_hash(c))), std::string::npos);
  EXPECT_THROW(run_table1(c), Error);
}

TEST(Experiments, GapPreconditions) {
  EXPECT_NO_THROW(check_gap_boundary(-1.2, 1.1));
  EXPECT_THROW(check_gap_boundary(0.9, 1.1), Error);
  EXPECT_THROW(check_gap_boundary(1.2, 1.5), Error);
  EXPECT_THROW(check_gap_boundary(0.0, 2.5), Error);
}

TEST(Experiments, GapReportFlagsLargeK) {
  auto c = load_run_config(std::string(MANE_SOURCE_DIR) + "/configs/example_gap.json");
  c.sampling.batches = 2;
  c.sampling.samples_per_batch = 200;
  c.domain.a = -3.0;
  const auto r = run_example_gap(c);
  EXPECT_NEAR(r.K_closed, 0.41, 1e-12);
  EXPECT_TRUE(r.K_flagged);
  EXPECT_NEAR(r.value_closed, 0.005, 1e-12);
  EXPECT_NEAR(r.numeric.value, 0.005, 1e-9);
}
