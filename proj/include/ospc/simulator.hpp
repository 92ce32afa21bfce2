#pragma once

// Finite-population slot simulator: arrivals, threshold scheduling, per-band
// power allocation, and empirical delay / busy-period / energy measurement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ospc/channel_models.hpp"
#include "ospc/error.hpp"
#include "ospc/numerics.hpp"
#include "ospc/random.hpp"
#include "ospc/scheduler.hpp"

namespace ospc {

struct ConstantArrivals {
  friend bool operator==(const ConstantArrivals&, const ConstantArrivals&) = default;
};

/// nu = 1/p with probability p, else 0.
struct BernoulliScaled {
  double p = 0.5;
  friend bool operator==(const BernoulliScaled&, const BernoulliScaled&) = default;
};

/// Integer uniform on [lo, hi], divided by its mean.
struct UniformDiscrete {
  int lo = 0;
  int hi = 2;
  friend bool operator==(const UniformDiscrete&, const UniformDiscrete&) = default;
};

/// Per-slot demand multiplier nu with E[nu] = 1 and bounded support.
class ArrivalLaw {
 public:
  using Variant = std::variant<ConstantArrivals, BernoulliScaled, UniformDiscrete>;

  ArrivalLaw() = default;
  explicit ArrivalLaw(Variant v) : v_(v) {
    if (const auto* b = std::get_if<BernoulliScaled>(&v_)) {
      require(b->p > 0.0 && b->p <= 1.0, ErrorKind::kInvalidInput,
              "Bernoulli arrival probability must lie in (0, 1]");
    }
    if (const auto* u = std::get_if<UniformDiscrete>(&v_)) {
      require(u->lo >= 0 && u->hi >= u->lo && u->hi > 0, ErrorKind::kInvalidInput,
              "uniform arrivals need 0 <= lo <= hi, hi > 0");
    }
  }

  static ArrivalLaw constant() { return ArrivalLaw(ConstantArrivals{}); }
  static ArrivalLaw bernoulli_scaled(double p) { return ArrivalLaw(BernoulliScaled{p}); }
  static ArrivalLaw uniform_discrete(int lo, int hi) { return ArrivalLaw(UniformDiscrete{lo, hi}); }

  const Variant& variant() const { return v_; }

  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ConstantArrivals>) {
            return 1.0;
          } else if constexpr (std::is_same_v<T, BernoulliScaled>) {
            return rng.bernoulli(law.p) ? 1.0 / law.p : 0.0;
          } else {
            const double mean = 0.5 * (law.lo + law.hi);
            return static_cast<double>(rng.uniform_int(law.lo, law.hi)) / mean;
          }
        },
        v_);
  }

  /// nu > 0 almost surely.
  bool always_positive() const {
    if (std::holds_alternative<ConstantArrivals>(v_)) return true;
    if (const auto* b = std::get_if<BernoulliScaled>(&v_)) return b->p == 1.0;
    return std::get<UniformDiscrete>(v_).lo > 0;
  }

  std::string describe() const {
    return std::visit(
        [](const auto& law) -> std::string {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ConstantArrivals>) {
            return "constant";
          } else if constexpr (std::is_same_v<T, BernoulliScaled>) {
            return "bernoulli(p=" + std::to_string(law.p) + ")";
          } else {
            return "uniform(" + std::to_string(law.lo) + "," + std::to_string(law.hi) + ")";
          }
        },
        v_);
  }

  friend bool operator==(const ArrivalLaw&, const ArrivalLaw&) = default;

 private:
  Variant v_{ConstantArrivals{}};
};

struct SimConfig {
  std::size_t users = 50;
  double spectral_efficiency = 1.0;  // Gamma, nats
  PathLossLaw pathloss{2.0, 0.01};
  FadingLaw fading = FadingLaw::exp_unit_mean(10);
  ClassThresholds thresholds = ClassThresholds::single(FadingLaw::exp_unit_mean(10), 0.0);
  ArrivalLaw arrival;
  std::int64_t horizon = 100000;
  double n0 = 1.0;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> warmup;  // default: ceil(10 / min gamma)
  bool record_energy_series = false;
  std::vector<double> fixed_pathloss;  // when non-empty, used instead of random placement

  void validate() const {
    require(users >= 1, ErrorKind::kConfigInvalid, "need at least one user");
    require(horizon >= 1, ErrorKind::kConfigInvalid, "horizon must be >= 1 slot");
    require(spectral_efficiency > 0.0 && std::isfinite(spectral_efficiency),
            ErrorKind::kConfigInvalid, "spectral efficiency must be positive");
    require(n0 > 0.0 && std::isfinite(n0), ErrorKind::kConfigInvalid, "N0 must be positive");
    require(!warmup || (*warmup >= 0 && *warmup < horizon), ErrorKind::kConfigInvalid,
            "warm-up must lie in [0, horizon)");
    require(fixed_pathloss.empty() || fixed_pathloss.size() == users, ErrorKind::kConfigInvalid,
            "fixed path-loss vector must have one entry per user");
    for (double s : fixed_pathloss) {
      require(s > 0.0 && std::isfinite(s), ErrorKind::kConfigInvalid,
              "fixed path loss must be positive");
    }
    try {
      thresholds.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kConfigInvalid, e.what());
    }
  }

  double min_gamma() const {
    double g = 1.0;
    for (double k : thresholds.kappa) g = std::min(g, fading.best_tail(k));
    return g;
  }

  /// Slots excluded from the averages.
  std::int64_t effective_warmup() const {
    if (warmup) return *warmup;
    const double g = min_gamma();
    if (g <= 0.0) return 0;
    return std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(10.0 / g)), horizon - 1);
  }

  /// Users [round(K c_{l-1}), round(K c_l)) belong to class l, c the
  /// cumulative class fractions.
  std::vector<std::size_t> class_assignment() const {
    std::vector<std::size_t> cls(users, thresholds.classes() - 1);
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t l = 0; l < thresholds.classes(); ++l) {
      cumulative += thresholds.fraction[l];
      const auto end = std::min(
          users, static_cast<std::size_t>(std::llround(cumulative * static_cast<double>(users))));
      for (std::size_t i = begin; i < end; ++i) cls[i] = l;
      begin = std::max(begin, end);
    }
    return cls;
  }
};

struct UserMetrics {
  double pathloss = 0.0;
  std::size_t class_id = 0;
  double mean_delay = 0.0;             // arrival-mass weighted, slots
  double mean_delay_unweighted = 0.0;  // each arrival slot counts once
  double mean_busy_period = 0.0;       // completed busy periods, slots
  std::int64_t max_busy_period = 0;    // includes a period still open at the horizon
  std::int64_t busy_periods = 0;
  double mean_service_interval = 0.0;  // slots between consecutive selections
  double selection_frequency = 0.0;
  double mean_demand_at_service = 0.0;  // queue at selection in units of Gamma/K
  std::int64_t selections = 0;
  double arrived = 0.0;  // nats over the whole horizon
  double served = 0.0;
  double final_queue = 0.0;
};

struct Metrics {
  std::vector<UserMetrics> users;
  double energy_efficiency = 0.0;    // time-averaged (Eb/N0)_sys, per nat
  double mean_slot_energy = 0.0;     // time-averaged raw sum energy
  std::vector<double> energy_series; // per measured slot, when recorded
  std::vector<double> class_mean_delay;
  std::int64_t horizon = 0;
  std::int64_t warmup = 0;
  std::int64_t measured_slots = 0;
  double total_arrived = 0.0;
  double total_served = 0.0;
  double total_final_queue = 0.0;
};

/// Simulates one system for cfg.horizon slots. Within a slot, arrivals land
/// first, then the fading is drawn and the slot is scheduled; an arrival
/// served in its own slot has delay 1.
inline Metrics run(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.users;
  const auto bands = static_cast<std::size_t>(cfg.fading.bands());
  const double unit_demand = cfg.spectral_efficiency / static_cast<double>(k);
  const std::int64_t warmup = cfg.effective_warmup();

  Rng rng(cfg.seed);
  std::vector<UserState> users(k);
  const auto classes = cfg.class_assignment();
  for (std::size_t i = 0; i < k; ++i) {
    users[i].pathloss = cfg.fixed_pathloss.empty() ? sample_pathloss(cfg.pathloss, rng)
                                                   : cfg.fixed_pathloss[i];
    users[i].class_id = classes[i];
  }

  struct Accumulator {
    double pending_mass = 0.0;   // measured arrivals not yet served
    double pending_delay = 0.0;  // their accrued delay mass
    double pending_count = 0.0;
    double pending_count_delay = 0.0;
    double delay_mass = 0.0;
    double delay_sum = 0.0;
    double count = 0.0;
    double count_delay_sum = 0.0;
    std::optional<std::int64_t> busy_start;
    std::int64_t busy_total = 0;
    std::int64_t busy_periods = 0;
    std::int64_t busy_max = 0;
    std::optional<std::int64_t> last_selection;
    std::int64_t interval_total = 0;
    std::int64_t intervals = 0;
    std::int64_t selections = 0;
    double demand_total = 0.0;
    double arrived = 0.0;
    double served = 0.0;
  };
  std::vector<Accumulator> acc(k);

  Metrics metrics;
  metrics.horizon = cfg.horizon;
  metrics.warmup = warmup;
  if (cfg.record_energy_series) {
    metrics.energy_series.reserve(static_cast<std::size_t>(cfg.horizon - warmup));
  }
  SlotChannel channel(k, bands);
  double efficiency_sum = 0.0;
  double energy_sum = 0.0;

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const bool measured = t > warmup;
    for (std::size_t i = 0; i < k; ++i) {
      const double mass = unit_demand * cfg.arrival.sample(rng);
      auto& a = acc[i];
      users[i].queue += mass;
      a.arrived += mass;
      if (measured && mass > 0.0) {
        a.pending_mass += mass;
        a.pending_count += 1.0;
      }
      a.pending_delay += a.pending_mass;
      a.pending_count_delay += a.pending_count;
      if (users[i].queue > 0.0 && !a.busy_start) a.busy_start = t;
    }

    channel.set_slot(t);
    channel.redraw(cfg.fading, rng);
    const auto decision = schedule_slot(channel, cfg.thresholds, users, cfg.n0);

    for (std::size_t j = 0; j < decision.selected.size(); ++j) {
      const std::size_t i = decision.selected[j];
      auto& a = acc[i];
      a.served += decision.rate[j];
      if (a.pending_mass > 0.0) {
        a.delay_mass += a.pending_mass;
        a.delay_sum += a.pending_delay;
        a.count += a.pending_count;
        a.count_delay_sum += a.pending_count_delay;
      }
      a.pending_mass = a.pending_delay = a.pending_count = a.pending_count_delay = 0.0;
      if (a.busy_start) {
        const std::int64_t length = t - *a.busy_start + 1;
        if (*a.busy_start > warmup) {
          a.busy_total += length;
          ++a.busy_periods;
        }
        a.busy_max = std::max(a.busy_max, length);
        a.busy_start.reset();
      }
      if (measured) {
        ++a.selections;
        a.demand_total += decision.rate[j] / unit_demand;
        if (a.last_selection && *a.last_selection >= warmup) {
          a.interval_total += t - *a.last_selection;
          ++a.intervals;
        }
      }
      a.last_selection = t;
    }

    if (measured) {
      const double energy = decision.total_energy();
      const double efficiency = energy / (cfg.n0 * cfg.spectral_efficiency);
      energy_sum += energy;
      efficiency_sum += efficiency;
      if (cfg.record_energy_series) metrics.energy_series.push_back(efficiency);
    }
  }

  metrics.measured_slots = cfg.horizon - warmup;
  const double measured_slots = static_cast<double>(metrics.measured_slots);
  metrics.energy_efficiency = efficiency_sum / measured_slots;
  metrics.mean_slot_energy = energy_sum / measured_slots;

  std::vector<double> class_mass(cfg.thresholds.classes(), 0.0);
  std::vector<double> class_delay(cfg.thresholds.classes(), 0.0);
  metrics.users.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = acc[i];
    auto& u = metrics.users[i];
    u.pathloss = users[i].pathloss;
    u.class_id = users[i].class_id;
    u.mean_delay = a.delay_mass > 0.0 ? a.delay_sum / a.delay_mass : 0.0;
    u.mean_delay_unweighted = a.count > 0.0 ? a.count_delay_sum / a.count : 0.0;
    u.busy_periods = a.busy_periods;
    u.mean_busy_period =
        a.busy_periods > 0 ? static_cast<double>(a.busy_total) / static_cast<double>(a.busy_periods)
                           : 0.0;
    u.max_busy_period = a.busy_max;
    if (a.busy_start) u.max_busy_period = std::max(u.max_busy_period, cfg.horizon - *a.busy_start + 1);
    u.mean_service_interval =
        a.intervals > 0 ? static_cast<double>(a.interval_total) / static_cast<double>(a.intervals)
                        : 0.0;
    u.selections = a.selections;
    u.selection_frequency = static_cast<double>(a.selections) / measured_slots;
    u.mean_demand_at_service =
        a.selections > 0 ? a.demand_total / static_cast<double>(a.selections) : 0.0;
    u.arrived = a.arrived;
    u.served = a.served;
    u.final_queue = users[i].queue;
    metrics.total_arrived += a.arrived;
    metrics.total_served += a.served;
    metrics.total_final_queue += users[i].queue;
    class_mass[u.class_id] += a.delay_mass;
    class_delay[u.class_id] += a.delay_sum;
  }
  metrics.class_mean_delay.resize(class_mass.size());
  for (std::size_t l = 0; l < class_mass.size(); ++l) {
    metrics.class_mean_delay[l] = class_mass[l] > 0.0 ? class_delay[l] / class_mass[l] : 0.0;
  }
  return metrics;
}

struct EnsembleSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> values;  // per system, in system order
};

/// Runs independent systems (fresh placement each) with seeds derived from
/// base_seed; the summary does not depend on the thread count.
inline EnsembleSummary run_ensemble(const SimConfig& cfg, std::size_t systems,
                                    std::uint64_t base_seed, unsigned threads = 1) {
  require(systems >= 1, ErrorKind::kConfigInvalid, "ensemble needs at least one system");
  cfg.validate();
  EnsembleSummary summary;
  summary.values.assign(systems, 0.0);
  numerics::parallel_for(systems, threads, [&](std::size_t j) {
    SimConfig member = cfg;
    member.seed = derive_seed(base_seed, j);
    member.fixed_pathloss.clear();
    summary.values[j] = run(member).energy_efficiency;
  });
  summary.min = *std::min_element(summary.values.begin(), summary.values.end());
  summary.max = *std::max_element(summary.values.begin(), summary.values.end());
  double total = 0.0;
  for (double v : summary.values) total += v;
  summary.mean = total / static_cast<double>(systems);
  return summary;
}

struct StabilityVerdict {
  std::size_t user = 0;
  double mean_busy_period = 0.0;
  std::int64_t max_busy_period = 0;
  bool unstable = false;
};

/// Flags users whose longest busy period exceeds `max_fraction` of the horizon.
inline std::vector<StabilityVerdict> stability_report(const Metrics& metrics,
                                                      double max_fraction = 0.1) {
  std::vector<StabilityVerdict> verdicts;
  verdicts.reserve(metrics.users.size());
  const double limit = max_fraction * static_cast<double>(metrics.horizon);
  for (std::size_t i = 0; i < metrics.users.size(); ++i) {
    const auto& u = metrics.users[i];
    verdicts.push_back({i, u.mean_busy_period, u.max_busy_period,
                        static_cast<double>(u.max_busy_period) > limit});
  }
  return verdicts;
}

}  // namespace ospc
