#pragma once

// Acceptance suite. Each check recomputes its reference values with code that
// does not go through the function under test wherever that is possible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ospc/channel_models.hpp"
#include "ospc/mean_field.hpp"
#include "ospc/numerics.hpp"
#include "ospc/power_alloc.hpp"
#include "ospc/random.hpp"
#include "ospc/scheduler.hpp"
#include "ospc/simulator.hpp"

namespace ospc::validation {

using Allocator =
    std::function<PowerVector(std::span<const double>, std::span<const double>, double)>;

struct Options {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  // Allocation under test in check 6; swapped out by the mutation test.
  Allocator allocator = [](std::span<const double> g, std::span<const double> r, double n0) {
    return optimal_allocation(g, r, n0);
  };
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Outcome {
  bool passed;
  std::string detail;
};

struct Check {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome(const Options&)> body;
};

namespace detail {

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

inline AnalysisConfig reference_setup(double gamma_nats, int bands, double kappa) {
  return {gamma_nats,
          ConditionalChannelLaw(PathLossLaw(2.0, 0.01), FadingLaw::exp_unit_mean(bands), kappa),
          RateUnit::kNats};
}

inline std::vector<double> kappa_grid() {
  std::vector<double> g(50);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 0.1 * static_cast<double>(j);
  return g;
}

// Sum energy of a decoding order written straight from the successive
// decoding constraints: the i-th decoded user needs
// d E = N0 (e^{R_i} - e^{R_{i-1}}), R_i the rate decoded after it plus its own.
inline double order_energy(std::span<const double> gains, std::span<const double> rates,
                           double n0, std::span<const std::size_t> weakest_first) {
  double total = 0.0;
  double before = 0.0;
  for (std::size_t user : weakest_first) {
    const double after = before + rates[user];
    total += n0 * (std::exp(after) - std::exp(before)) / gains[user];
    before = after;
  }
  return total;
}

inline double brute_force_min(std::span<const double> gains, std::span<const double> rates,
                              double n0) {
  std::vector<std::size_t> perm(gains.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = kInf;
  do {
    best = std::min(best, order_energy(gains, rates, n0, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct DelayRuns {
  std::vector<std::string> labels;
  std::vector<Metrics> metrics;
  double target = 0.0;
};

// Three arrival laws, K = 50, M = 10, gamma = 1/3, T = 2e5; shared by
// checks 2 and 3 and computed once per seed.
inline const DelayRuns& delay_runs(const Options& opt) {
  static std::mutex mutex;
  static std::map<std::uint64_t, DelayRuns> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(opt.seed); it != cache.end()) return it->second;

  const auto fading = FadingLaw::exp_unit_mean(10);
  const std::vector<ArrivalLaw> laws{ArrivalLaw::constant(), ArrivalLaw::bernoulli_scaled(0.5),
                                     ArrivalLaw::uniform_discrete(1, 3)};
  DelayRuns runs;
  runs.target = 1.0 / gamma_of(fading, kappa_for_delay(fading, 3.0));
  runs.metrics.resize(laws.size());
  numerics::parallel_for(laws.size(), opt.threads, [&](std::size_t j) {
    SimConfig cfg;
    cfg.users = 50;
    cfg.fading = fading;
    cfg.thresholds = ClassThresholds::from_delays(fading, {3.0}, {1.0});
    cfg.arrival = laws[j];
    cfg.horizon = 200000;
    cfg.seed = derive_seed(opt.seed, 200 + j);
    runs.metrics[j] = run(cfg);
  });
  for (const auto& law : laws) runs.labels.push_back(law.describe());
  return cache.emplace(opt.seed, std::move(runs)).first->second;
}

template <class Field>
Outcome per_user_within(const DelayRuns& runs, Field field, double tolerance) {
  bool ok = true;
  std::ostringstream os;
  os << "target " << fmt(runs.target) << "; worst per-user deviation:";
  for (std::size_t j = 0; j < runs.metrics.size(); ++j) {
    double worst = 0.0;
    for (const auto& u : runs.metrics[j].users) {
      worst = std::max(worst, std::abs(field(u) - runs.target) / runs.target);
    }
    ok = ok && worst <= tolerance;
    os << " " << runs.labels[j] << "=" << fmt(100.0 * worst, 3) << "%";
  }
  return {ok, os.str()};
}

}  // namespace detail

inline Outcome check_delay_saving(const Options&) {
  const auto fading = FadingLaw::exp_unit_mean(10);
  const double kappa3 = kappa_for_delay(fading, 3.0);
  bool ok = true;
  std::ostringstream os;
  os << "kappa(D=3)=" << detail::fmt(kappa3) << "; dB saving D=1->3:";
  for (double g : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double e1 = energy_efficiency(detail::reference_setup(g, 10, 0.0)).value_db;
    const double e3 = energy_efficiency(detail::reference_setup(g, 10, kappa3)).value_db;
    ok = ok && (e1 - e3) > 3.0;
    os << " G=" << g << ":" << detail::fmt(e1 - e3, 4);
  }
  os << " (need > 3)";
  return {ok, os.str()};
}

inline Outcome check_delay(const Options& opt) {
  return detail::per_user_within(
      detail::delay_runs(opt), [](const UserMetrics& u) { return u.mean_delay; }, 0.02);
}

inline Outcome check_busy_period(const Options& opt) {
  return detail::per_user_within(
      detail::delay_runs(opt), [](const UserMetrics& u) { return u.mean_busy_period; }, 0.02);
}

inline Outcome check_monotonicity(const Options&) {
  const auto grid = detail::kappa_grid();
  bool ok = true;
  std::ostringstream os;
  for (int bands : {1, 10}) {
    for (double g : {1.0, 4.0}) {
      double previous = kInf;
      double worst = 0.0;
      for (double kappa : grid) {
        const double e = energy_efficiency(detail::reference_setup(g, bands, kappa)).value;
        if (std::isfinite(previous)) worst = std::max(worst, (e - previous) / previous);
        previous = e;
      }
      ok = ok && worst <= 1e-6;
      os << "M=" << bands << ",G=" << g << " max rise " << detail::fmt(worst, 3) << "; ";
    }
  }
  return {ok, os.str()};
}

inline Outcome check_upper_bounds(const Options&) {
  const auto grid = detail::kappa_grid();
  const PathLossLaw pl(2.0, 0.01);
  const double inv = mean_inverse_pathloss(pl);
  bool ok = true;
  std::size_t points = 0;
  double worst_gap = kInf;
  for (int bands : {1, 10}) {
    for (double g : {1.0, 4.0}) {
      const double per_band = pathloss_exp_expectation(pl, g / bands);
      const double whole = pathloss_exp_expectation(pl, g);
      for (double kappa : grid) {
        if (kappa <= 0.0) continue;
        const double e = energy_efficiency(detail::reference_setup(g, bands, kappa)).value;
        const double b1 = per_band / kappa;
        const double b1_whole = whole / kappa;
        const double b2 = std::exp(g) * inv / kappa;
        const double slack = 1e-9;
        ok = ok && e <= b1 * (1 + slack) && b1 <= b1_whole * (1 + slack) &&
             b1_whole <= b2 * (1 + slack);
        worst_gap = std::min(worst_gap, (b1 - e) / b1);
        ++points;
      }
    }
  }
  return {ok, std::to_string(points) + " grid points; smallest relative margin to bound1 " +
                  detail::fmt(worst_gap, 4)};
}

inline Outcome check_power_optimality(const Options& opt) {
  Rng rng(derive_seed(opt.seed, 6));
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 6));
    std::vector<double> gains(k);
    std::vector<double> rates(k);
    for (std::size_t i = 0; i < k; ++i) {
      gains[i] = std::pow(10.0, rng.uniform(-3.0, 2.0));
      rates[i] = rng.uniform(0.0, 3.0);
    }
    const double n0 = std::pow(10.0, rng.uniform(-1.0, 1.0));
    const double got = opt.allocator(gains, rates, n0).sum();
    const double best = detail::brute_force_min(gains, rates, n0);
    worst = std::max(worst, std::abs(got - best) / std::max(best, 1e-300));
  }
  return {worst <= 1e-10, "max relative gap to brute-force minimum " + detail::fmt(worst, 3)};
}

inline Outcome check_capacity_region(const Options& opt) {
  Rng rng(derive_seed(opt.seed, 7));
  bool ok = true;
  double worst_tight = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 12));
    std::vector<double> gains(k);
    std::vector<double> rates(k);
    for (std::size_t i = 0; i < k; ++i) {
      gains[i] = std::pow(10.0, rng.uniform(-2.0, 2.0));
      rates[i] = rng.uniform(0.0, 1.0);
    }
    const auto powers = optimal_allocation(gains, rates, 1.0);
    ok = ok && capacity_region_check(gains, powers, rates);
    worst_tight = std::max(worst_tight, std::abs(full_set_slack(gains, powers, rates)));
  }
  ok = ok && worst_tight <= 1e-9;

  double worst_identity = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(rng.uniform_int(1, 20)));
    for (double& x : a) x = rng.uniform(0.0, 10.0);
    const auto [left, right] = sum_rate_identity(a, rng.uniform(0.1, 10.0));
    worst_identity = std::max(worst_identity, std::abs(left - right));
  }
  ok = ok && worst_identity <= 1e-12;
  return {ok, "full-set slack " + detail::fmt(worst_tight, 3) + ", sum-rate residual " +
                  detail::fmt(worst_identity, 3)};
}

inline Outcome check_rate_exchange(const Options& opt) {
  Rng rng(derive_seed(opt.seed, 8));
  double worst_rise = 0.0;
  double worst_end = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 8));
    std::vector<double> gains(k);
    for (double& g : gains) g = std::pow(10.0, rng.uniform(-2.0, 2.0));
    std::sort(gains.begin(), gains.end());
    std::vector<double> target(k);
    for (double& r : target) r = rng.uniform(0.0, 1.5);
    // Push rate toward weaker users and add some on top: every prefix sum of
    // rho then dominates that of the target.
    std::vector<double> rho = target;
    for (std::size_t i = k; i-- > 1;) {
      const double moved = rng.uniform() * rho[i];
      rho[i] -= moved;
      rho[i - 1] += moved;
    }
    if (rng.bernoulli(0.5)) rho[rng.uniform_int(0, static_cast<std::int64_t>(k) - 1)] += rng.uniform();
    const auto trace = rate_exchange_trace(rho, target, gains, 1.0);
    for (std::size_t j = 1; j < trace.size(); ++j) {
      worst_rise = std::max(worst_rise, (trace[j] - trace[j - 1]) / std::max(trace[j - 1], 1e-300));
    }
    const double expected = detail::order_energy(gains, target, 1.0, ascending_gain_order(gains));
    worst_end = std::max(worst_end, std::abs(trace.back() - expected) / std::max(expected, 1e-300));
  }
  return {worst_rise <= 1e-12 && worst_end <= 1e-12,
          "max relative rise " + detail::fmt(worst_rise, 3) + ", terminal mismatch " +
              detail::fmt(worst_end, 3)};
}

inline Outcome check_conditional_cdf(const Options& opt) {
  const PathLossLaw pl(2.0, 0.01);
  bool ok = true;
  std::ostringstream os;
  os << "KS:";
  const std::vector<std::pair<double, int>> cases{{0.0, 10}, {1.0, 10}, {2.0, 1}};
  std::vector<double> stats(cases.size());
  numerics::parallel_for(cases.size(), opt.threads, [&](std::size_t c) {
    const auto [kappa, bands] = cases[c];
    const ConditionalChannelLaw law(pl, FadingLaw::exp_unit_mean(bands), kappa);
    Rng rng(derive_seed(opt.seed, 90 + c));
    // Raw construction: uniform placement in the annulus, then best of
    // `bands` exponentials redrawn until it clears the threshold.
    std::vector<double> sample(1000000);
    for (double& x : sample) {
      const double r = std::sqrt(rng.uniform(0.01 * 0.01, 1.0));
      double best = 0.0;
      do {
        best = 0.0;
        for (int m = 0; m < bands; ++m) best = std::max(best, rng.exponential());
      } while (best <= kappa);
      x = best / (r * r);
    }
    stats[c] = numerics::ks_statistic(std::move(sample), [&](double x) {
      return conditional_channel_cdf_closed_form(law, x);
    });
  });
  for (std::size_t c = 0; c < cases.size(); ++c) {
    ok = ok && stats[c] < 0.01;
    os << " (" << cases[c].first << "," << cases[c].second << ")=" << detail::fmt(stats[c], 3);
  }
  return {ok, os.str()};
}

inline Outcome check_pfs_cdf(const Options&) {
  const PathLossLaw pl(2.0, 0.01);
  double worst = 0.0;
  for (int k : {1, 10, 50}) {
    const ConditionalChannelLaw law(pl, FadingLaw::exp_unit_mean(k), 0.0);
    for (int j = 0; j < 100; ++j) {
      const double x = std::pow(10.0, -3.0 + 7.0 * j / 99.0);
      worst = std::max(worst, std::abs(pfs_channel_cdf(pl, k, x) -
                                       conditional_channel_cdf_closed_form(law, x)));
    }
  }
  return {worst <= 1e-12, "max |closed form - quadrature| " + detail::fmt(worst, 3)};
}

inline Outcome check_convergence(const Options& opt) {
  const double asymptote = energy_efficiency(detail::reference_setup(1.0, 10, 0.0)).value;
  std::vector<double> spreads;
  bool contains = false;
  std::ostringstream os;
  os << "asymptote " << detail::fmt(asymptote) << ";";
  for (std::size_t k : {8u, 32u, 128u}) {
    SimConfig cfg;
    cfg.users = k;
    cfg.horizon = 10000;
    const auto s = run_ensemble(cfg, 100, derive_seed(opt.seed, 11), opt.threads);
    spreads.push_back(s.max - s.min);
    contains = s.min <= asymptote && asymptote <= s.max;
    os << " K=" << k << " [" << detail::fmt(s.min, 4) << ", " << detail::fmt(s.max, 4) << "]";
  }
  const bool decreasing = spreads[0] > spreads[1] && spreads[1] > spreads[2];
  return {decreasing && contains, os.str()};
}

inline Outcome check_pareto_delay(const Options&) {
  const PathLossLaw pl(2.0, 0.01);
  const auto fading = FadingLaw::pareto_tail(2.0);
  double worst = 0.0;
  for (double kappa : {2.0, 5.0, 10.0}) {
    const double d = delay_of_kappa(ConditionalChannelLaw(pl, fading, kappa));
    worst = std::max(worst, std::abs(d - kappa) / kappa);
  }
  return {worst <= 1e-12, "max relative |D - kappa| " + detail::fmt(worst, 3)};
}

inline Outcome check_uniform_sandwich(const Options&) {
  const PathLossLaw pl(2.0, 0.01);
  const auto fading = FadingLaw::bounded_uniform(1.0, 1);
  std::vector<double> grid;
  for (int j = 0; j <= 19; ++j) grid.push_back(0.05 * j);
  grid.push_back(0.99);
  bool ok = true;
  std::ostringstream os;
  os << "gap at kappa=0.99:";
  for (double g : {0.5, 1.0, 4.0}) {
    const AnalysisConfig base{g, ConditionalChannelLaw(pl, fading, 0.0), RateUnit::kNats};
    const double lower = energy_lower_bound(base).value;
    double gap = kInf;
    for (double kappa : grid) {
      const double e = energy_efficiency(base.with_kappa(kappa)).value;
      ok = ok && e >= lower * (1.0 - 1e-9);
      gap = (e - lower) / lower;
    }
    ok = ok && gap <= 0.05;
    os << " G=" << g << ":" << detail::fmt(100.0 * gap, 3) << "%";
  }
  return {ok, os.str()};
}

inline Outcome check_delay_classes(const Options& opt) {
  SimConfig cfg;
  cfg.users = 50;
  cfg.thresholds = ClassThresholds::from_delays(cfg.fading, {1.0, 4.0}, {0.5, 0.5});
  cfg.horizon = 200000;
  cfg.seed = derive_seed(opt.seed, 14);
  const auto m = run(cfg);
  bool ok = true;
  std::ostringstream os;
  for (std::size_t l = 0; l < m.class_mean_delay.size(); ++l) {
    const double target = cfg.thresholds.target_delay[l];
    const double dev = std::abs(m.class_mean_delay[l] - target) / target;
    ok = ok && dev <= 0.03;
    os << "class " << l << ": " << detail::fmt(m.class_mean_delay[l], 5) << " vs " << target
       << "; ";
  }
  return {ok, os.str()};
}

inline const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {1, ">3 dB saving from D=1 to D=3", 30, check_delay_saving},
      {2, "per-user mean delay = 1/gamma (2%)", 60, check_delay},
      {3, "per-user busy period = 1/gamma (2%)", 60, check_busy_period},
      {4, "Eb/N0 non-increasing in kappa", 60, check_monotonicity},
      {5, "energy <= bound1 <= bound2", 60, check_upper_bounds},
      {6, "ascending-gain allocation is optimal", 60, check_power_optimality},
      {7, "capacity region + sum-rate identity", 60, check_capacity_region},
      {8, "rate-exchange trace non-increasing", 60, check_rate_exchange},
      {9, "conditional channel CDF vs Monte Carlo", 60, check_conditional_cdf},
      {10, "PFS channel CDF matches kappa=0 law", 60, check_pfs_cdf},
      {11, "finite-K ensembles converge", 120, check_convergence},
      {12, "Pareto fading: delay = kappa", 60, check_pareto_delay},
      {13, "bounded fading: lower bound sandwich", 60, check_uniform_sandwich},
      {14, "two delay classes meet targets (3%)", 60, check_delay_classes},
  };
  return all;
}

inline CheckResult run_check(const Check& check, const Options& opt) {
  CheckResult r{check.id, check.name, false, "", 0.0, check.budget_seconds};
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto out = check.body(opt);
    r.passed = out.passed;
    r.detail = out.detail;
  } catch (const std::exception& e) {
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += " [over time budget " + detail::fmt(r.budget_seconds) + " s]";
  }
  return r;
}

inline CheckResult run_check(int id, const Options& opt) {
  for (const auto& c : checks()) {
    if (c.id == id) return run_check(c, opt);
  }
  fail(ErrorKind::kInvalidInput, "no acceptance check " + std::to_string(id));
}

inline std::vector<CheckResult> run_all(const Options& opt) {
  std::vector<CheckResult> results;
  for (const auto& c : checks()) results.push_back(run_check(c, opt));
  return results;
}

}  // namespace ospc::validation
