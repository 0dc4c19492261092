#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mane/experiments.hpp"
#include "mane/oracle.hpp"
#include "mane/potential.hpp"
#include "mane/run_config.hpp"

namespace {

using namespace mane;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;
constexpr int kDegenerate = 4;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool desk = false;
  std::string out;
  std::optional<std::size_t> threads;
};

RunConfig table2_defaults() {
  RunConfig c;
  c.model.family = "sis";
  c.model.rho = 3.0;
  c.domain = {0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5, 0.0, 0.0};
  c.epsilon.clear();
  c.n = {100, 200, 300, 400, 500};
  c.T = {0.5};
  c.sampling.samples_per_batch = 1000;
  c.sampling.desk_samples_per_batch = 500;
  return c;
}

RunConfig gap_defaults() {
  RunConfig c;
  c.model.family = "drifted_brownian";
  c.model.drift = 1.0;
  c.domain = {-1.2, 1.1, 0.0, 1.0, 0.0, 0.0};
  c.T = {1.0};
  c.event = EventRule::TerminalOutside;
  return c;
}

RunConfig resolve(const Common& opt, RunConfig defaults) {
  RunConfig cfg = opt.config.empty() ? std::move(defaults) : load_run_config(opt.config);
  if (opt.seed) cfg.sampling.seed = *opt.seed;
  if (opt.threads) cfg.sampling.threads = *opt.threads;
  if (opt.desk) cfg.apply_desk_scale();
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = std::filesystem::path(cfg.output_dir) / name;
  std::ofstream os(path);
  if (!os) fail(ErrorCode::ConfigError, "cannot write " + path.string());
  std::cout << "wrote=" << path.string() << '\n';
  return os;
}

void print_sweep(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  const bool diffusion = is_diffusion(cfg);
  std::cout << "config_hash=" << hex(config_hash(cfg)) << '\n';
  for (const auto& r : rows) {
    std::cout << (diffusion ? "epsilon=" : "n=") << r.scale << " T=" << r.T << " x0=" << r.x0
              << " estimate=" << r.est.mean << " rel_err=" << r.est.rel_err << " hits=" << r.est.hits
              << " c_star=" << r.mm.c_star << " y_star=" << r.mm.y_star << " K=" << r.mm.K
              << " wall_time=" << r.est.wall_time << "s seed=" << r.est.seed << '\n';
  }
}

int sweep_status(const std::vector<SweepRow>& rows) {
  for (const auto& r : rows) {
    if (r.est.degenerate) {
      std::cerr << "degenerate estimate: no path reached the event\n";
      return kDegenerate;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mane-potential subsolutions and rare-event importance sampling"};
  app.require_subcommand(1);
  Common opt;
  app.add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "override sampling seed");
  app.add_flag("--desk-scale", opt.desk, "use the reduced desk-scale sampling budget");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);

  double c = 0.0, x = 0.0, y = 0.0;
  std::size_t profile = 0;
  auto* potential = app.add_subcommand("potential", "Mane potential S^c(x, y)");
  potential->add_option("-c,--energy", c, "energy level")->required();
  potential->add_option("-x", x, "start point")->required();
  potential->add_option("-y", y, "end point")->required();
  potential->add_option("--profile", profile, "also write a gradient profile CSV with this many points");

  auto* critical = app.add_subcommand("critical-value", "critical value c_H on the domain");
  auto* minmax_cmd = app.add_subcommand("minmax", "min-max energy optimisation for every configured T");
  auto* duality = app.add_subcommand("duality-check", "Mane potential vs grid Mather action");
  auto* simulate = app.add_subcommand("simulate", "batched estimator over the configured sweep");
  auto* table1 = app.add_subcommand("table1", "double-well exit probabilities");
  auto* table2 = app.add_subcommand("table2", "SIS exit probabilities");
  auto* gap = app.add_subcommand("example-gap", "min/max interchange toy problem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    std::cout.precision(10);
    if (potential->parsed()) {
      const RunConfig cfg = resolve(opt, {});
      const ProcessModel model = cfg.model.build();
      const double s = mane_potential(PotentialQuery{model, {cfg.domain.a, cfg.domain.b}, c, x, y});
      std::cout << "c=" << c << " x=" << x << " y=" << y << " S=" << s << '\n';
      if (profile >= 2) {
        auto os = open_output(cfg, "potential_profile.csv");
        os.precision(12);
        os << "z,p\n";
        for (const auto& pt : potential_profile(model, c, x, y, profile)) os << pt.z << ',' << pt.p << '\n';
      }
      return kOk;
    }
    if (critical->parsed()) {
      const RunConfig cfg = resolve(opt, {});
      std::cout << "a=" << cfg.domain.a << " b=" << cfg.domain.b
                << " c_H=" << critical_value(cfg.model.build(), cfg.domain.a, cfg.domain.b) << '\n';
      return kOk;
    }
    if (minmax_cmd->parsed()) {
      const RunConfig cfg = resolve(opt, {});
      const ProcessModel model = cfg.model.build();
      for (double T : cfg.T) {
        WorkingDomain d = cfg.domain;
        d.T = T;
        const auto r = minmax(model, d);
        std::cout << "T=" << T << " c_H=" << r.c_h << " value=" << r.value << " c_star=" << r.c_star
                  << " y_star=" << r.y_star << " maxmin=" << r.maxmin_value << " gap=" << r.gap << " K=" << r.K
                  << '\n';
      }
      return kOk;
    }
    if (duality->parsed()) {
      const RunConfig cfg = resolve(opt, {});
      const auto& g = cfg.grid;
      double t_hi = 0.0;
      for (double t : cfg.duality.t) t_hi = std::max(t_hi, t);
      GridSpec grid{g.x_lo, g.x_hi, g.nx, t_hi, g.nt, g.v_max, g.stencil, g.velocities};
      const auto rep = duality_check(cfg.model.build(), cfg.duality.x, cfg.duality.y, cfg.duality.t,
                                     cfg.duality.c, grid, cfg.duality.tolerance);
      auto os = open_output(cfg, "duality_residuals.csv");
      os.precision(12);
      os << "direction,parameter,continuum,grid,abs_residual,rel_residual\n";
      for (const auto& e : rep.by_time) {
        os << "time," << e.parameter << ',' << e.lhs << ',' << e.rhs << ',' << e.abs_residual << ','
           << e.rel_residual << '\n';
      }
      for (const auto& e : rep.by_energy) {
        os << "energy," << e.parameter << ',' << e.lhs << ',' << e.rhs << ',' << e.abs_residual << ','
           << e.rel_residual << '\n';
      }
      std::cout << "c_H=" << rep.c_h << " tolerance=" << rep.tolerance << " (empirical grid tolerance)\n";
      for (const auto& e : rep.by_time) {
        std::cout << "t=" << e.parameter << " sup_c=" << e.lhs << " M_grid=" << e.rhs << " rel=" << e.rel_residual
                  << '\n';
      }
      for (const auto& e : rep.by_energy) {
        std::cout << "c=" << e.parameter << " S=" << e.lhs << " min_t=" << e.rhs << " rel=" << e.rel_residual
                  << '\n';
      }
      std::cout << (rep.pass() ? "PASS" : "FAIL") << '\n';
      return rep.pass() ? kOk : kNumericalFailure;
    }
    if (simulate->parsed() || table1->parsed() || table2->parsed()) {
      const bool t2 = table2->parsed();
      const RunConfig cfg = resolve(opt, t2 ? table2_defaults() : RunConfig{});
      const auto rows = table1->parsed() ? run_table1(cfg) : t2 ? run_table2(cfg) : run_sweep(cfg);
      print_sweep(cfg, rows);
      const std::string stem = table1->parsed() ? "table1" : t2 ? "table2" : "simulate";
      {
        auto os = open_output(cfg, stem + ".csv");
        write_sweep_csv(os, cfg, rows);
      }
      {
        auto os = open_output(cfg, stem + "_batches.csv");
        write_batch_csv(os, cfg, rows);
      }
      return sweep_status(rows);
    }
    if (gap->parsed()) {
      const RunConfig cfg = resolve(opt, gap_defaults());
      const auto r = run_example_gap(cfg);
      std::cout << "a=" << r.a << " b=" << r.b << " epsilon=" << r.epsilon << '\n'
                << "closed_form value=" << r.value_closed << " maxmin=" << r.maxmin_closed << " K=" << r.K_closed
                << (r.K_flagged ? " [K above threshold]" : "") << '\n'
                << "numeric value=" << r.numeric.value << " maxmin=" << r.numeric.maxmin_value
                << " K=" << r.numeric.K << " c_star=" << r.numeric.c_star << " y_star=" << r.numeric.y_star << '\n'
                << "importance estimate=" << r.importance.mean << " rel_err=" << r.importance.rel_err << '\n'
                << "standard estimate=" << r.standard.mean << " rel_err=" << r.standard.rel_err << '\n';
      if (r.importance.degenerate && r.standard.degenerate) return kDegenerate;
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::InvalidArgument:
      case ErrorCode::WrongModel:
        return kConfigError;
      default:
        return kNumericalFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
