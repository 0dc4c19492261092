#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mane/error.hpp"
#include "mane/model.hpp"
#include "mane/oracle.hpp"
#include "mane/sampler.hpp"

namespace mane {

inline constexpr int kSchemaVersion = 1;

enum class Method { Standard, Uc, UcyK };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Standard: return "standard";
    case Method::Uc: return "Uc";
    case Method::UcyK: return "UcyK";
  }
  return "?";
}

/// Model block. `family` selects which of the remaining fields are read.
///   double_well                      Phi = 1/2 (x^2 - 1)^2, sigma = 1
///   drifted_brownian: drift          dX = drift dt + sqrt(eps) dB
///   diffusion: potential, sigma      polynomial coefficients
///   sis: rho                         lambda = rho x (1 - x), mu = x
///   birth_death: birth, death        polynomial coefficients
///   state_independent: drift, variance
struct ModelBlock {
  std::string family = "double_well";
  double rho = 3.0;
  double drift = 1.0;
  double variance = 1.0;
  std::vector<double> potential;
  std::vector<double> sigma;
  std::vector<double> birth;
  std::vector<double> death;

  ProcessModel build() const {
    if (family == "double_well") return ProcessModel::double_well();
    if (family == "drifted_brownian") return ProcessModel::drifted_brownian(drift);
    if (family == "diffusion") return ProcessModel::diffusion(ScalarFunction(potential), ScalarFunction(sigma));
    if (family == "sis") return ProcessModel::sis(rho);
    if (family == "birth_death") return ProcessModel::birth_death(ScalarFunction(birth), ScalarFunction(death));
    if (family == "state_independent") return ProcessModel::state_independent(drift, variance);
    fail(ErrorCode::ConfigError, "unknown model family '" + family + "'");
  }

  bool operator==(const ModelBlock&) const = default;
};

struct SamplingBlock {
  std::size_t batches = 50;
  std::size_t samples_per_batch = 10000;
  std::size_t desk_batches = 10;
  std::size_t desk_samples_per_batch = 1000;
  double dt_fraction = 1e-3;  // dt = T * dt_fraction
  std::uint64_t seed = 20240601;
  std::size_t threads = 1;
  bool operator==(const SamplingBlock&) const = default;
};

struct GridBlock {
  std::size_t nx = 401;
  std::size_t nt = 200;
  double v_max = 8.0;
  Stencil stencil = Stencil::Interpolated;
  std::size_t velocities = 161;
  double x_lo = 0.9;
  double x_hi = 1.5;
  bool operator==(const GridBlock&) const = default;
};

struct DualityBlock {
  double x = 1.0;
  double y = 1.42;
  std::vector<double> t{0.25, 0.5};
  std::vector<double> c;
  double tolerance = 0.05;
  bool operator==(const DualityBlock&) const = default;
};

struct GapBlock {
  double epsilon = 0.1;
  double k_threshold = 0.1;
  bool operator==(const GapBlock&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ModelBlock model;
  WorkingDomain domain{-1.42, 1.42, 1.0, 0.25, 0.0, 0.0};
  Method method = Method::UcyK;
  std::vector<double> epsilon{0.09, 0.05, 0.03};
  std::vector<std::size_t> n;
  std::vector<double> T{0.25, 0.5, 1.0, 2.0};
  EventRule event = EventRule::Exit;
  SamplingBlock sampling;
  GridBlock grid;
  DualityBlock duality;
  GapBlock gap;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;

  /// Switch the sampling budget to the desk-scale counts.
  void apply_desk_scale() {
    sampling.batches = sampling.desk_batches;
    sampling.samples_per_batch = sampling.desk_samples_per_batch;
  }

  void validate() const {
    auto check = [](bool ok, const std::string& msg) {
      if (!ok) fail(ErrorCode::ConfigError, msg);
    };
    check(schema_version == kSchemaVersion, "unsupported schema_version " + std::to_string(schema_version));
    const ProcessModel m = model.build();
    check(domain.a < domain.b, "domain needs a < b");
    check(!T.empty(), "T list is empty");
    for (double t : T) check(t > 0.0, "T values must be positive");
    check(sampling.batches >= 2 && sampling.desk_batches >= 2, "need at least two batches");
    check(sampling.samples_per_batch >= 1 && sampling.desk_samples_per_batch >= 1, "need samples per batch");
    check(sampling.dt_fraction > 0.0 && sampling.dt_fraction <= 1.0, "dt_fraction must lie in (0, 1]");
    check(sampling.threads >= 1, "threads must be >= 1");
    const bool diffusion = quadratic_point(m, domain.x0).has_value();
    if (m.kind() == ModelKind::PureBirth) fail(ErrorCode::ConfigError, "pure-birth models cannot be sampled");
    if (diffusion) {
      for (double e : epsilon) check(e > 0.0, "epsilon values must be positive");
    } else {
      for (std::size_t k : n) check(k >= 1, "n values must be >= 1");
    }
    try {
      validate_model(m, domain.a, domain.b);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, std::string("model invalid on domain: ") + e.what());
    }
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, where + "." + key + ": " + e.what());
  }
}

template <class E>
E parse_enum(const json& j, const char* key, E fallback, std::initializer_list<std::pair<const char*, E>> table,
             const std::string& where) {
  if (!j.contains(key)) return fallback;
  std::string s;
  read(j, key, s, where);
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  fail(ErrorCode::ConfigError, where + "." + key + ": unknown value '" + s + "'");
}

inline const std::initializer_list<std::pair<const char*, Method>> kMethods = {
    {"standard", Method::Standard}, {"Uc", Method::Uc}, {"UcyK", Method::UcyK}};
inline const std::initializer_list<std::pair<const char*, EventRule>> kEvents = {
    {"exit", EventRule::Exit}, {"terminal_outside", EventRule::TerminalOutside}};
inline const std::initializer_list<std::pair<const char*, Stencil>> kStencils = {
    {"interpolated", Stencil::Interpolated}, {"node_pair", Stencil::NodePair}};

template <class E>
std::string enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

inline ModelBlock parse_model(const json& j) {
  ModelBlock m;
  if (!j.contains("family")) fail(ErrorCode::ConfigError, "model.family is required");
  read(j, "family", m.family, "model");
  std::set<std::string> allowed{"family"};
  if (m.family == "drifted_brownian") allowed.insert("drift");
  else if (m.family == "diffusion") allowed.insert({"potential", "sigma"});
  else if (m.family == "sis") allowed.insert("rho");
  else if (m.family == "birth_death") allowed.insert({"birth", "death"});
  else if (m.family == "state_independent") allowed.insert({"drift", "variance"});
  else if (m.family != "double_well") fail(ErrorCode::ConfigError, "unknown model family '" + m.family + "'");
  reject_unknown(j, allowed, "model");
  read(j, "rho", m.rho, "model");
  read(j, "drift", m.drift, "model");
  read(j, "variance", m.variance, "model");
  read(j, "potential", m.potential, "model");
  read(j, "sigma", m.sigma, "model");
  read(j, "birth", m.birth, "model");
  read(j, "death", m.death, "model");
  if (m.family == "diffusion" && (m.potential.empty() || m.sigma.empty())) {
    fail(ErrorCode::ConfigError, "diffusion model needs potential and sigma coefficients");
  }
  if (m.family == "birth_death" && (m.birth.empty() || m.death.empty())) {
    fail(ErrorCode::ConfigError, "birth_death model needs birth and death coefficients");
  }
  return m;
}

inline json model_json(const ModelBlock& m) {
  json j{{"family", m.family}};
  if (m.family == "drifted_brownian") j["drift"] = m.drift;
  if (m.family == "diffusion") {
    j["potential"] = m.potential;
    j["sigma"] = m.sigma;
  }
  if (m.family == "sis") j["rho"] = m.rho;
  if (m.family == "birth_death") {
    j["birth"] = m.birth;
    j["death"] = m.death;
  }
  if (m.family == "state_independent") {
    j["drift"] = m.drift;
    j["variance"] = m.variance;
  }
  return j;
}

}  // namespace detail

/// Parses and validates a configuration document. Unknown keys are errors.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j,
                         {"schema_version", "model", "domain", "method", "epsilon", "n", "T", "event", "sampling",
                          "grid", "duality", "gap", "output"},
                         "config");
  RunConfig cfg;
  read(j, "schema_version", cfg.schema_version, "config");
  if (!j.contains("model")) fail(ErrorCode::ConfigError, "config.model is required");
  cfg.model = detail::parse_model(j.at("model"));
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    detail::reject_unknown(d, {"a", "b", "x0", "g_a", "g_b"}, "domain");
    read(d, "a", cfg.domain.a, "domain");
    read(d, "b", cfg.domain.b, "domain");
    read(d, "x0", cfg.domain.x0, "domain");
    read(d, "g_a", cfg.domain.g_a, "domain");
    read(d, "g_b", cfg.domain.g_b, "domain");
  }
  cfg.method = detail::parse_enum(j, "method", cfg.method, detail::kMethods, "config");
  read(j, "epsilon", cfg.epsilon, "config");
  read(j, "n", cfg.n, "config");
  read(j, "T", cfg.T, "config");
  cfg.event = detail::parse_enum(j, "event", cfg.event, detail::kEvents, "config");
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    detail::reject_unknown(s,
                           {"batches", "samples_per_batch", "desk_batches", "desk_samples_per_batch", "dt_fraction",
                            "seed", "threads"},
                           "sampling");
    read(s, "batches", cfg.sampling.batches, "sampling");
    read(s, "samples_per_batch", cfg.sampling.samples_per_batch, "sampling");
    read(s, "desk_batches", cfg.sampling.desk_batches, "sampling");
    read(s, "desk_samples_per_batch", cfg.sampling.desk_samples_per_batch, "sampling");
    read(s, "dt_fraction", cfg.sampling.dt_fraction, "sampling");
    read(s, "seed", cfg.sampling.seed, "sampling");
    read(s, "threads", cfg.sampling.threads, "sampling");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown(g, {"nx", "nt", "v_max", "stencil", "velocities", "x_lo", "x_hi"}, "grid");
    read(g, "nx", cfg.grid.nx, "grid");
    read(g, "nt", cfg.grid.nt, "grid");
    read(g, "v_max", cfg.grid.v_max, "grid");
    cfg.grid.stencil = detail::parse_enum(g, "stencil", cfg.grid.stencil, detail::kStencils, "grid");
    read(g, "velocities", cfg.grid.velocities, "grid");
    read(g, "x_lo", cfg.grid.x_lo, "grid");
    read(g, "x_hi", cfg.grid.x_hi, "grid");
  }
  if (j.contains("duality")) {
    const auto& d = j.at("duality");
    detail::reject_unknown(d, {"x", "y", "t", "c", "tolerance"}, "duality");
    read(d, "x", cfg.duality.x, "duality");
    read(d, "y", cfg.duality.y, "duality");
    read(d, "t", cfg.duality.t, "duality");
    read(d, "c", cfg.duality.c, "duality");
    read(d, "tolerance", cfg.duality.tolerance, "duality");
  }
  if (j.contains("gap")) {
    const auto& g = j.at("gap");
    detail::reject_unknown(g, {"epsilon", "k_threshold"}, "gap");
    read(g, "epsilon", cfg.gap.epsilon, "gap");
    read(g, "k_threshold", cfg.gap.k_threshold, "gap");
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(o, {"dir"}, "output");
    read(o, "dir", cfg.output_dir, "output");
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

inline nlohmann::json to_json(const RunConfig& c) {
  using detail::enum_name;
  return {
      {"schema_version", c.schema_version},
      {"model", detail::model_json(c.model)},
      {"domain", {{"a", c.domain.a}, {"b", c.domain.b}, {"x0", c.domain.x0}, {"g_a", c.domain.g_a},
                  {"g_b", c.domain.g_b}}},
      {"method", enum_name(c.method, detail::kMethods)},
      {"epsilon", c.epsilon},
      {"n", c.n},
      {"T", c.T},
      {"event", enum_name(c.event, detail::kEvents)},
      {"sampling", {{"batches", c.sampling.batches}, {"samples_per_batch", c.sampling.samples_per_batch},
                    {"desk_batches", c.sampling.desk_batches},
                    {"desk_samples_per_batch", c.sampling.desk_samples_per_batch},
                    {"dt_fraction", c.sampling.dt_fraction}, {"seed", c.sampling.seed},
                    {"threads", c.sampling.threads}}},
      {"grid", {{"nx", c.grid.nx}, {"nt", c.grid.nt}, {"v_max", c.grid.v_max},
                {"stencil", enum_name(c.grid.stencil, detail::kStencils)}, {"velocities", c.grid.velocities},
                {"x_lo", c.grid.x_lo}, {"x_hi", c.grid.x_hi}}},
      {"duality", {{"x", c.duality.x}, {"y", c.duality.y}, {"t", c.duality.t}, {"c", c.duality.c},
                   {"tolerance", c.duality.tolerance}}},
      {"gap", {{"epsilon", c.gap.epsilon}, {"k_threshold", c.gap.k_threshold}}},
      {"output", {{"dir", c.output_dir}}},
  };
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2); }

/// FNV-1a of the canonical serialization; identifies a configuration in
/// emitted rows.
inline std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace mane
