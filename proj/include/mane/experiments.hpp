#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mane/error.hpp"
#include "mane/run_config.hpp"
#include "mane/sampler.hpp"
#include "mane/subsolution.hpp"

namespace mane {

/// One (scale, T) cell of a sweep. `scale` is epsilon for diffusions and n
/// for birth-death runs; x0 is the start point actually used.
struct SweepRow {
  double scale;
  double T;
  double x0;
  MinMaxResult mm;
  Estimate est;
};

inline bool is_diffusion(const RunConfig& cfg) {
  return quadratic_point(cfg.model.build(), cfg.domain.x0).has_value();
}

/// Simulation setup for one cell, with the control built from the min-max
/// optimum on the (possibly snapped) domain.
inline SimConfig build_sim(const RunConfig& cfg, double scale, double T, MinMaxResult* mm_out = nullptr) {
  SimConfig sim;
  sim.model = cfg.model.build();
  sim.domain = cfg.domain;
  sim.domain.T = T;
  if (quadratic_point(sim.model, sim.domain.x0)) {
    sim.epsilon = scale;
    sim.dt = T * cfg.sampling.dt_fraction;
  } else {
    sim.n = static_cast<std::size_t>(scale);
    sim.domain.x0 = snap_to_lattice(sim.domain.x0, sim.n);
  }
  sim.batches = cfg.sampling.batches;
  sim.samples_per_batch = cfg.sampling.samples_per_batch;
  sim.seed = cfg.sampling.seed;
  sim.threads = cfg.sampling.threads;
  sim.event = cfg.event;
  const MinMaxResult mm = minmax(sim.model, sim.domain);
  if (cfg.method == Method::Uc) sim.subsolution = Subsolution::from_minmax(SubsolutionVariant::Uc, sim.model, sim.domain, mm);
  if (cfg.method == Method::UcyK) {
    sim.subsolution = Subsolution::from_minmax(SubsolutionVariant::UcyK, sim.model, sim.domain, mm);
  }
  if (mm_out) *mm_out = mm;
  return sim;
}

inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  cfg.validate();
  std::vector<double> scales = cfg.epsilon;
  if (!is_diffusion(cfg)) scales.assign(cfg.n.begin(), cfg.n.end());
  if (scales.empty()) fail(ErrorCode::ConfigError, "no scale parameters (epsilon or n) configured");
  std::vector<SweepRow> rows;
  for (double scale : scales) {
    for (double T : cfg.T) {
      MinMaxResult mm{};
      const SimConfig sim = build_sim(cfg, scale, T, &mm);
      rows.push_back({scale, T, sim.domain.x0, mm, estimate(sim)});
    }
  }
  return rows;
}

inline std::vector<SweepRow> run_table1(const RunConfig& cfg) {
  if (!is_diffusion(cfg)) fail(ErrorCode::ConfigError, "table1 needs a diffusion model block");
  return run_sweep(cfg);
}

inline std::vector<SweepRow> run_table2(const RunConfig& cfg) {
  if (cfg.model.build().kind() != ModelKind::BirthDeath) {
    fail(ErrorCode::ConfigError, "table2 needs a birth-death model block");
  }
  if (cfg.n.empty()) fail(ErrorCode::ConfigError, "table2 needs a list of n");
  return run_sweep(cfg);
}

inline void write_sweep_csv(std::ostream& os, const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  const bool diffusion = is_diffusion(cfg);
  os << (diffusion ? "epsilon" : "n")
     << ",T,x0,method,estimate,rel_err,hits,samples,c_star,y_star,K,wall_time,seed,config_hash\n";
  const std::string hash = hex(config_hash(cfg));
  os.precision(10);
  for (const auto& r : rows) {
    if (diffusion) os << r.scale;
    else os << static_cast<std::size_t>(r.scale);
    os << ',' << r.T << ',' << r.x0 << ',' << to_string(cfg.method) << ',' << r.est.mean << ',' << r.est.rel_err
       << ',' << r.est.hits << ',' << r.est.total_samples << ',' << r.mm.c_star << ',' << r.mm.y_star << ','
       << r.mm.K << ',' << r.est.wall_time << ',' << r.est.seed << ',' << hash << '\n';
  }
}

inline void write_batch_csv(std::ostream& os, const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  os << (is_diffusion(cfg) ? "epsilon" : "n") << ",T,batch,batch_mean,seed,config_hash\n";
  const std::string hash = hex(config_hash(cfg));
  os.precision(10);
  for (const auto& r : rows) {
    for (std::size_t b = 0; b < r.est.batch_means.size(); ++b) {
      os << r.scale << ',' << r.T << ',' << b << ',' << r.est.batch_means[b] << ',' << r.est.seed << ',' << hash
         << '\n';
    }
  }
}

/// Terminal-exit toy problem for dX = dt + sqrt(eps) dB from X(0) = 0 with
/// T = 1 and zero boundary cost, where min and max need not commute.
struct GapReport {
  double a;
  double b;
  double epsilon;
  // closed forms
  double value_closed;
  double maxmin_closed;
  double K_closed;
  // numerical min-max machinery
  MinMaxResult numeric;
  bool K_flagged;
  Estimate importance;
  Estimate standard;
};

inline void check_gap_boundary(double a, double b) {
  if (!(a < 1.0 && 1.0 < b)) fail(ErrorCode::ConfigError, "example gap needs a < 1 < b");
  if (!(b - 1.0 < 1.0 - a)) fail(ErrorCode::ConfigError, "example gap needs b - 1 < 1 - a");
}

inline GapReport run_example_gap(const RunConfig& cfg) {
  if (cfg.model.family != "drifted_brownian" || cfg.model.drift != 1.0) {
    fail(ErrorCode::ConfigError, "example gap needs the drifted_brownian model with drift 1");
  }
  const double a = cfg.domain.a;
  const double b = cfg.domain.b;
  check_gap_boundary(a, b);

  GapReport r{};
  r.a = a;
  r.b = b;
  r.epsilon = cfg.gap.epsilon;
  r.value_closed = 0.5 * (b - 1.0) * (b - 1.0);
  r.maxmin_closed = 0.0;
  r.K_closed = (b - a) * (b - 1.0);
  r.K_flagged = r.K_closed > cfg.gap.k_threshold;

  const ProcessModel model = cfg.model.build();
  const WorkingDomain domain{a, b, 0.0, 1.0, 0.0, 0.0};
  const double c_h = critical_value(model, a, b);
  r.numeric = minmax(model, c_h, domain.x0, Boundary::of(domain), domain.T);

  SimConfig sim;
  sim.model = model;
  sim.domain = domain;
  sim.epsilon = cfg.gap.epsilon;
  sim.dt = domain.T * cfg.sampling.dt_fraction;
  sim.batches = cfg.sampling.batches;
  sim.samples_per_batch = cfg.sampling.samples_per_batch;
  sim.seed = cfg.sampling.seed;
  sim.threads = cfg.sampling.threads;
  sim.event = EventRule::TerminalOutside;
  r.standard = estimate(sim);
  sim.subsolution = Subsolution::ucyk(model, domain, r.numeric.c_star, r.numeric.y_star, r.numeric.K);
  r.importance = estimate(sim);
  return r;
}

}  // namespace mane
