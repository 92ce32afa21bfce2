#pragma once

// The CLI subcommands, each turning an ExperimentConfig into a ResultTable.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "ospc/experiment.hpp"
#include "ospc/mean_field.hpp"
#include "ospc/simulator.hpp"
#include "ospc/validation.hpp"

#ifndef OSPC_VERSION
#define OSPC_VERSION "0.0.0"
#endif

namespace ospc {

struct RunOptions {
  unsigned threads = 1;
  bool paper_scale = false;
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class TableScope {
 public:
  TableScope(ResultTable& table, std::string command, const ExperimentConfig& cfg,
             const RunOptions& opts)
      : table_(table), start_(std::chrono::steady_clock::now()) {
    table_.metadata = {{"tool", "ospc"},
                       {"version", OSPC_VERSION},
                       {"command", std::move(command)},
                       {"config", cfg.to_json()},
                       {"seed", cfg.seed},
                       {"paper_scale", opts.paper_scale},
                       {"threads", opts.threads},
                       {"started_utc", utc_timestamp()}};
  }
  ~TableScope() {
    table_.metadata["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  ResultTable& table_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// (Gamma, delay, kappa, gamma, Eb/N0) over the delay grid, one block per Gamma.
inline ResultTable cmd_tradeoff(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  ResultTable t;
  detail::TableScope scope(t, "tradeoff", cfg, opts);
  const auto unit = std::string(to_string(cfg.rate_unit));
  t.columns = {"spectral_efficiency_" + unit, "delay", "kappa", "gamma",
               "ebn0_per_" + unit, "ebn0_db"};
  const auto& ses = cfg.spectral_efficiencies;
  std::vector<std::vector<TradeoffRow>> blocks(ses.size());
  numerics::parallel_for(ses.size(), opts.threads, [&](std::size_t j) {
    // Configured spectral efficiencies are in the report unit.
    const double nats = cfg.rate_unit == RateUnit::kBits ? ses[j] * std::numbers::ln2 : ses[j];
    blocks[j] = tradeoff_table(cfg.delays, cfg.analysis_config(nats));
  });
  for (std::size_t j = 0; j < ses.size(); ++j) {
    for (const auto& row : blocks[j]) {
      const double e = efficiency_in(cfg.rate_unit, row.ebn0);
      t.add_row({ses[j], row.delay, row.kappa, row.gamma, e, numerics::to_db(e)});
    }
  }
  return t;
}

/// OSPC curves (one per kappa) evaluated at the spectral efficiencies the PFS
/// curve reaches, followed by the PFS curve itself. OSPC spectral efficiency
/// is per band, Gamma / M.
inline ResultTable cmd_compare_pfs(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  ResultTable t;
  detail::TableScope scope(t, "compare-pfs", cfg, opts);
  const auto unit = std::string(to_string(cfg.rate_unit));
  t.columns = {"curve", "kappa", "delay", "snr_db", "spectral_efficiency_" + unit,
               "ebn0_per_" + unit, "ebn0_db"};

  const auto snr = snr_grid_db(cfg.pfs.snr_db_min, cfg.pfs.snr_db_max, cfg.pfs.points);
  const auto pfs = pfs_curve(snr, cfg.pfs.users, cfg.pathloss);
  const int bands = cfg.fading.bands();

  const std::size_t n = pfs.size();
  std::vector<double> ospc(cfg.kappas.size() * n);
  numerics::parallel_for(ospc.size(), opts.threads, [&](std::size_t idx) {
    const double kappa = cfg.kappas[idx / n];
    const double nats_per_band = pfs[idx % n].capacity_bits * std::numbers::ln2;
    ospc[idx] = energy_efficiency(cfg.analysis_config(nats_per_band * bands, kappa)).value;
  });

  for (std::size_t c = 0; c < cfg.kappas.size(); ++c) {
    const double kappa = cfg.kappas[c];
    const double g = cfg.fading.best_tail(kappa);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = efficiency_in(cfg.rate_unit, ospc[c * n + i]);
      t.add_row({std::string("ospc"), kappa, g > 0.0 ? 1.0 / g : kInf, std::monostate{},
                 rate_in(cfg.rate_unit, pfs[i].capacity_bits * std::numbers::ln2), e,
                 numerics::to_db(e)});
    }
  }
  for (const auto& p : pfs) {
    const double e = efficiency_in(cfg.rate_unit, p.ebn0_per_bit / std::numbers::ln2);
    t.add_row({std::string("pfs"), std::monostate{}, std::monostate{}, numerics::to_db(p.snr),
               rate_in(cfg.rate_unit, p.capacity_bits * std::numbers::ln2), e,
               numerics::to_db(e)});
  }
  t.metadata["pfs_users"] = cfg.pfs.users;
  return t;
}

/// Ensemble extremes per (Gamma, K) against the K-independent asymptote.
inline ResultTable cmd_convergence(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  ResultTable t;
  detail::TableScope scope(t, "convergence", cfg, opts);
  const auto unit = std::string(to_string(cfg.rate_unit));
  t.columns = {"spectral_efficiency_" + unit, "users", "systems", "horizon", "min_db",
               "max_db",  "mean_db", "spread_db", "asymptotic_db", "max_relative_deviation"};
  const auto& conv = cfg.convergence;
  const std::size_t systems = opts.paper_scale ? 1000 : conv.systems;
  t.metadata["systems"] = systems;

  for (double se : conv.spectral_efficiencies) {
    const double nats = cfg.rate_unit == RateUnit::kBits ? se * std::numbers::ln2 : se;
    const double asymptote = energy_efficiency(cfg.analysis_config(nats, conv.kappa)).value;
    for (std::size_t k : conv.users) {
      SimConfig sim;
      sim.users = k;
      sim.spectral_efficiency = nats;
      sim.pathloss = cfg.pathloss;
      sim.fading = cfg.fading;
      sim.thresholds = ClassThresholds::single(cfg.fading, conv.kappa);
      sim.horizon = conv.horizon;
      const auto s = run_ensemble(sim, systems, cfg.seed, opts.threads);
      auto db = [&](double v) { return numerics::to_db(efficiency_in(cfg.rate_unit, v)); };
      const double dev = std::max(std::abs(s.max - asymptote), std::abs(s.min - asymptote)) /
                         asymptote;
      t.add_row({se, static_cast<std::int64_t>(k), static_cast<std::int64_t>(systems),
                 conv.horizon, db(s.min), db(s.max), db(s.mean), db(s.max) - db(s.min),
                 db(asymptote), dev});
    }
  }
  return t;
}

/// One system; per-user rows, system-level figures in the metadata.
inline ResultTable cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  ResultTable t;
  detail::TableScope scope(t, "simulate", cfg, opts);
  SimConfig sim;
  try {
    sim = cfg.sim_config();
    sim.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfigInvalid) throw;
    fail(ErrorKind::kConfigInvalid, e.what());
  }
  const auto m = run(sim);
  const auto verdicts = stability_report(m, cfg.simulation.stability_fraction);
  t.columns = {"user", "class", "pathloss", "target_delay", "mean_delay", "mean_delay_unweighted",
               "mean_busy_period", "max_busy_period", "mean_service_interval",
               "selection_frequency", "mean_demand_at_service", "unstable"};
  for (std::size_t i = 0; i < m.users.size(); ++i) {
    const auto& u = m.users[i];
    t.add_row({static_cast<std::int64_t>(i), static_cast<std::int64_t>(u.class_id), u.pathloss,
               sim.thresholds.target_delay[u.class_id], u.mean_delay, u.mean_delay_unweighted,
               u.mean_busy_period, u.max_busy_period, u.mean_service_interval,
               u.selection_frequency, u.mean_demand_at_service, verdicts[i].unstable});
  }
  const double e = efficiency_in(cfg.rate_unit, m.energy_efficiency);
  t.metadata["summary"] = {{"energy_efficiency", e},
                           {"energy_efficiency_db", numerics::to_db(e)},
                           {"mean_slot_energy", m.mean_slot_energy},
                           {"class_mean_delay", m.class_mean_delay},
                           {"class_kappa", sim.thresholds.kappa},
                           {"warmup", m.warmup},
                           {"measured_slots", m.measured_slots},
                           {"total_arrived", m.total_arrived},
                           {"total_served", m.total_served},
                           {"total_final_queue", m.total_final_queue}};
  return t;
}

/// Acceptance suite as a table; the caller decides the exit status.
/// Runs every check, or only `only` when it is set.
inline ResultTable cmd_validate(const ExperimentConfig& cfg, const RunOptions& opts = {},
                                std::optional<int> only = std::nullopt) {
  ResultTable t;
  detail::TableScope scope(t, "validate", cfg, opts);
  t.columns = {"id", "check", "passed", "seconds", "detail"};
  validation::Options vopt;
  vopt.threads = opts.threads;
  vopt.seed = cfg.seed;
  bool all = true;
  const auto results = only ? std::vector<validation::CheckResult>{validation::run_check(*only, vopt)}
                            : validation::run_all(vopt);
  for (const auto& r : results) {
    all = all && r.passed;
    t.add_row({static_cast<std::int64_t>(r.id), r.name, r.passed, r.seconds, r.detail});
  }
  t.metadata["all_passed"] = all;
  return t;
}

}  // namespace ospc
