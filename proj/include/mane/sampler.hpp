#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "mane/error.hpp"
#include "mane/model.hpp"
#include "mane/potential.hpp"
#include "mane/random.hpp"
#include "mane/subsolution.hpp"

namespace mane {

/// Which event the estimator counts.
///   Exit: the path leaves (a, b) at a grid time (or jump time) no later than T.
///   TerminalOutside: the state at T lies outside (a, b).
enum class EventRule { Exit, TerminalOutside };

/// Per-path quantity averaged by estimate().
///   Event: exp(log_weight) on the event, 0 otherwise.
///   LikelihoodRatio: exp(log_weight) on every path.
enum class Estimand { Event, LikelihoodRatio };

struct SimConfig {
  ProcessModel model = ProcessModel::double_well();
  WorkingDomain domain;
  std::optional<Subsolution> subsolution;  // empty: standard Monte Carlo
  double epsilon = 0.0;                    // diffusion noise scale
  std::size_t n = 0;                       // birth-death population scale
  double dt = 0.0;                         // diffusion step
  std::size_t batches = 50;
  std::size_t samples_per_batch = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  EventRule event = EventRule::Exit;
  Estimand estimand = Estimand::Event;
  /// When false the path runs to T regardless of exits; the control is then
  /// switched off outside (a, b).
  bool stop_at_exit = true;

  bool is_diffusion() const { return quadratic_point(model, domain.x0).has_value(); }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(domain.T / dt)); }

  void validate() const {
    if (event == EventRule::Exit) {
      domain.validate();
    } else {
      // A terminal event may be rare even from a start point outside (a, b).
      require(domain.a < domain.b && domain.T > 0.0, "domain needs a < b and T > 0");
    }
    require(batches >= 2, "need at least two batches");
    require(samples_per_batch >= 1, "need at least one sample per batch");
    require(threads >= 1, "need at least one worker");
    if (is_diffusion()) {
      require(epsilon > 0.0, "diffusion runs need epsilon > 0");
      require(dt > 0.0, "diffusion runs need dt > 0");
      const double k = std::round(domain.T / dt);
      require(k >= 1.0 && std::abs(k * dt - domain.T) <= 64.0 * std::numeric_limits<double>::epsilon() * domain.T,
              "dt must divide T");
    } else {
      require(model.kind() == ModelKind::BirthDeath, "sampler supports diffusion and birth-death models");
      require(n >= 1, "birth-death runs need n >= 1");
    }
    if (subsolution) require(subsolution->model() == model, "subsolution was built for a different model");
  }
};

struct PathRecord {
  bool exited = false;
  double exit_time = 0.0;
  double log_weight = 0.0;
  bool stalled = false;
  double final_state = 0.0;
};

struct Estimate {
  double mean = 0.0;
  std::vector<double> batch_means;
  double rel_err = 0.0;
  std::size_t total_samples = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
  std::size_t hits = 0;
  std::size_t stalled = 0;
  bool degenerate = false;

  /// Standard error of the grand mean from the batch means.
  double std_error() const {
    const auto m = static_cast<double>(batch_means.size());
    double ss = 0.0;
    for (double b : batch_means) ss += (b - mean) * (b - mean);
    return std::sqrt(ss / (m - 1.0) / m);
  }
};

/// Nearest lattice point k / n (ties round away from zero).
inline double snap_to_lattice(double x, std::size_t n) {
  return static_cast<double>(std::llround(x * static_cast<double>(n))) / static_cast<double>(n);
}

/// Stream id for path `path` of batch `batch`.
inline std::uint64_t stream_id(std::size_t batch, std::size_t path) {
  return (static_cast<std::uint64_t>(batch) << 32) | static_cast<std::uint64_t>(path);
}

/// log dP/dQ over one Euler step, written in the Q-Brownian increment db.
inline double girsanov_increment(double theta, double db, double dt, double epsilon) {
  return -theta * db / std::sqrt(epsilon) - 0.5 * theta * theta * dt / epsilon;
}

namespace detail {

inline bool outside(const WorkingDomain& d, double x) { return !d.contains(x); }

inline void finish(const SimConfig& cfg, PathRecord& rec) {
  if (cfg.event == EventRule::TerminalOutside) {
    rec.exited = outside(cfg.domain, rec.final_state);
    rec.exit_time = cfg.domain.T;
  }
}

}  // namespace detail

/// Euler-Maruyama path under the controlled measure with log dP/dQ.
inline PathRecord simulate_diffusion_path(const SimConfig& cfg, Philox& rng) {
  const auto& d = cfg.domain;
  const Subsolution* s = cfg.subsolution ? &*cfg.subsolution : nullptr;
  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double sqrt_eps = std::sqrt(cfg.epsilon);
  const bool stop = cfg.stop_at_exit && cfg.event == EventRule::Exit;

  PathRecord rec;
  double x = d.x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto q = *quadratic_point(cfg.model, x);
    double theta = 0.0;
    if (s && (d.contains(x) || stop)) theta = q.sigma * gradient_branch(cfg.model, x, s->c(), s->branch(x));
    const double db = sqrt_dt * rng.normal();
    x += (-q.grad_potential + q.sigma * theta) * dt + sqrt_eps * q.sigma * db;
    rec.log_weight += girsanov_increment(theta, db, dt, cfg.epsilon);
    if (!rec.exited && detail::outside(d, x)) {
      rec.exited = true;
      rec.exit_time = k + 1 == steps ? d.T : static_cast<double>(k + 1) * dt;
      if (stop) break;
    }
  }
  rec.final_state = x;
  detail::finish(cfg, rec);
  return rec;
}

/// Per-lattice-state rates for the birth-death engine.
struct LatticeRates {
  std::vector<double> up;        // n * lambda_q
  std::vector<double> down;      // n * mu_q
  std::vector<double> drift;     // n (lambda_q + mu_q) - n (lambda + mu)
  std::vector<double> up_log;    // log(lambda / lambda_q)
  std::vector<double> down_log;  // log(mu / mu_q)

  static LatticeRates build(const SimConfig& cfg) {
    const auto& bd = *cfg.model.get_if<BirthDeath>();
    const double n = static_cast<double>(cfg.n);
    LatticeRates r;
    const std::size_t states = cfg.n + 1;
    r.up.resize(states);
    r.down.resize(states);
    r.drift.assign(states, 0.0);
    r.up_log.assign(states, 0.0);
    r.down_log.assign(states, 0.0);
    for (std::size_t k = 0; k < states; ++k) {
      const double x = static_cast<double>(k) / n;
      const double lam = std::max(bd.birth(x), 0.0);
      const double mu = std::max(bd.death(x), 0.0);
      double lq = lam;
      double mq = mu;
      if (cfg.subsolution && cfg.domain.contains(x)) {
        const auto t = tilted_rates(*cfg.subsolution, x);
        lq = t.birth;
        mq = t.death;
        r.up_log[k] = lam > 0.0 ? std::log(lam / lq) : 0.0;
        r.down_log[k] = mu > 0.0 ? std::log(mu / mq) : 0.0;
      }
      r.up[k] = n * lq;
      r.down[k] = n * mq;
      r.drift[k] = n * (lq + mq) - n * (lam + mu);
    }
    return r;
  }
};

/// Event-driven path under tilted rates; state is an integer count k = n x.
inline PathRecord simulate_bd_path(const SimConfig& cfg, const LatticeRates& rates, Philox& rng) {
  const auto& d = cfg.domain;
  const double n = static_cast<double>(cfg.n);
  const bool stop = cfg.stop_at_exit && cfg.event == EventRule::Exit;
  auto k = static_cast<std::ptrdiff_t>(std::llround(d.x0 * n));
  const auto top = static_cast<std::ptrdiff_t>(cfg.n);

  PathRecord rec;
  double t = 0.0;
  while (true) {
    const auto i = static_cast<std::size_t>(k);
    const double total = rates.up[i] + rates.down[i];
    if (!(total > 0.0)) {
      rec.log_weight += rates.drift[i] * (d.T - t);
      rec.stalled = !rec.exited;
      break;
    }
    const double wait = rng.exponential(total);
    if (t + wait > d.T) {
      rec.log_weight += rates.drift[i] * (d.T - t);
      break;
    }
    t += wait;
    rec.log_weight += rates.drift[i] * wait;
    if (rng.uniform() * total < rates.up[i]) {
      rec.log_weight += rates.up_log[i];
      k = std::min(k + 1, top);
    } else {
      rec.log_weight += rates.down_log[i];
      k = std::max<std::ptrdiff_t>(k - 1, 0);
    }
    if (!rec.exited && detail::outside(d, static_cast<double>(k) / n)) {
      rec.exited = true;
      rec.exit_time = t;
      if (stop) break;
    }
  }
  rec.final_state = static_cast<double>(k) / n;
  detail::finish(cfg, rec);
  return rec;
}

/// Configuration prepared for sampling: snapped start point, branch table for
/// Uc controls, lattice rates for birth-death runs.
class PreparedRun {
 public:
  explicit PreparedRun(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.subsolution && cfg_.subsolution->variant() == SubsolutionVariant::Uc &&
        !cfg_.subsolution->branch_table()) {
      cfg_.subsolution = cfg_.subsolution->with_branch_table();
    }
    if (!cfg_.is_diffusion()) {
      cfg_.domain.x0 = snap_to_lattice(cfg_.domain.x0, cfg_.n);
      require(cfg_.event != EventRule::Exit || cfg_.domain.contains(cfg_.domain.x0),
              "snapped start point left the domain");
      rates_ = LatticeRates::build(cfg_);
    }
  }

  const SimConfig& config() const noexcept { return cfg_; }

  PathRecord path(std::size_t batch, std::size_t index) const {
    Philox rng(cfg_.seed, stream_id(batch, index));
    if (cfg_.is_diffusion()) return simulate_diffusion_path(cfg_, rng);
    return simulate_bd_path(cfg_, *rates_, rng);
  }

 private:
  SimConfig cfg_;
  std::optional<LatticeRates> rates_;
};

inline PathRecord simulate_path(const SimConfig& cfg, std::size_t batch, std::size_t index) {
  return PreparedRun(cfg).path(batch, index);
}

/// Batched estimator. Paths are assigned to workers in contiguous blocks and
/// reduced in (batch, path) order, so the result does not depend on threads.
inline Estimate estimate(const SimConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedRun run(config);
  const auto& cfg = run.config();
  const std::size_t per = cfg.samples_per_batch;
  const std::size_t total = cfg.batches * per;
  std::vector<double> values(total);
  std::vector<unsigned char> hit(total);
  std::vector<unsigned char> stalled(total);

  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const auto rec = run.path(j / per, j % per);
      const double w = std::exp(rec.log_weight);
      values[j] = cfg.estimand == Estimand::LikelihoodRatio ? w : (rec.exited ? w : 0.0);
      hit[j] = rec.exited;
      stalled[j] = rec.stalled;
    }
  };
  const std::size_t workers = std::min(cfg.threads, total);
  if (workers <= 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, total * w / workers, total * (w + 1) / workers);
  }

  Estimate est;
  est.seed = cfg.seed;
  est.total_samples = total;
  est.batch_means.resize(cfg.batches);
  for (std::size_t b = 0; b < cfg.batches; ++b) {
    double acc = 0.0;
    for (std::size_t j = b * per; j < (b + 1) * per; ++j) acc += values[j];
    est.batch_means[b] = acc / static_cast<double>(per);
  }
  double acc = 0.0;
  for (double m : est.batch_means) acc += m;
  est.mean = acc / static_cast<double>(cfg.batches);
  for (std::size_t j = 0; j < total; ++j) {
    est.hits += hit[j];
    est.stalled += stalled[j];
  }
  est.rel_err = est.mean > 0.0 ? est.std_error() * std::sqrt(static_cast<double>(cfg.batches)) / est.mean : 0.0;
  est.degenerate = est.hits == 0;
  est.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

}  // namespace mane
