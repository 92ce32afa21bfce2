#pragma once

// Per-slot opportunistic superposition-coding decision: select every user
// whose best-band fading exceeds its class threshold, serve its whole queue
// on its best band, and allocate energy per band with successive decoding.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ospc/channel_models.hpp"
#include "ospc/error.hpp"
#include "ospc/power_alloc.hpp"

namespace ospc {

struct UserState {
  double pathloss = 1.0;
  double queue = 0.0;  // nats
  std::size_t class_id = 0;
  std::optional<std::int64_t> last_service_slot;
};

/// Fading of every user on every band in one slot, row-major users x bands.
class SlotChannel {
 public:
  SlotChannel(std::size_t users, std::size_t bands, std::int64_t slot = 0)
      : users_(users), bands_(bands), slot_(slot), fading_(users * bands, 0.0) {
    require(bands >= 1, ErrorKind::kInvalidInput, "at least one band is required");
  }

  SlotChannel(std::size_t users, std::size_t bands, std::vector<double> fading,
              std::int64_t slot = 0)
      : users_(users), bands_(bands), slot_(slot), fading_(std::move(fading)) {
    require(bands >= 1, ErrorKind::kInvalidInput, "at least one band is required");
    require(fading_.size() == users * bands, ErrorKind::kInvalidInput,
            "fading matrix size does not match users x bands");
    for (double f : fading_) {
      require(f >= 0.0, ErrorKind::kInvalidInput, "fading gains must be non-negative");
    }
  }

  std::size_t users() const { return users_; }
  std::size_t bands() const { return bands_; }
  std::int64_t slot() const { return slot_; }
  void set_slot(std::int64_t slot) { slot_ = slot; }

  double at(std::size_t user, std::size_t band) const { return fading_[user * bands_ + band]; }
  double& at(std::size_t user, std::size_t band) { return fading_[user * bands_ + band]; }

  /// Best band of a user; ties go to the lowest index.
  std::size_t best_band(std::size_t user) const {
    std::size_t best = 0;
    for (std::size_t m = 1; m < bands_; ++m) {
      if (at(user, m) > at(user, best)) best = m;
    }
    return best;
  }

  double best(std::size_t user) const { return at(user, best_band(user)); }

  /// Fresh i.i.d. draw for every user and band.
  void redraw(const FadingLaw& law, Rng& rng) {
    for (double& f : fading_) f = law.sample_band(rng);
  }

 private:
  std::size_t users_;
  std::size_t bands_;
  std::int64_t slot_;
  std::vector<double> fading_;
};

/// Entries are indexed by position in `selected`, not by user.
struct ScheduleDecision {
  std::vector<std::size_t> selected;
  std::vector<double> rate;
  std::vector<std::size_t> band;
  std::vector<double> energy;

  double total_energy() const { return std::accumulate(energy.begin(), energy.end(), 0.0); }
};

/// Per-class thresholds kappa_l, target delays D_l and population fractions.
struct ClassThresholds {
  std::vector<double> kappa;
  std::vector<double> target_delay;
  std::vector<double> fraction;

  std::size_t classes() const { return kappa.size(); }

  /// kappa_l = kappa_for_delay(D_l).
  static ClassThresholds from_delays(const FadingLaw& law, std::vector<double> delays,
                                     std::vector<double> fractions) {
    require(!delays.empty() && delays.size() == fractions.size(), ErrorKind::kInvalidInput,
            "need one fraction per delay class");
    ClassThresholds t;
    for (double d : delays) t.kappa.push_back(kappa_for_delay(law, d));
    t.target_delay = std::move(delays);
    t.fraction = std::move(fractions);
    t.validate();
    return t;
  }

  /// Single class with an explicit threshold; the target delay is 1/gamma
  /// (infinite when gamma = 0).
  static ClassThresholds single(const FadingLaw& law, double kappa) {
    require(kappa >= 0.0, ErrorKind::kInvalidInput, "threshold must be non-negative");
    const double g = law.best_tail(kappa);
    ClassThresholds t{{kappa}, {g > 0.0 ? 1.0 / g : kInf}, {1.0}};
    return t;
  }

  void validate() const {
    require(!kappa.empty() && kappa.size() == target_delay.size() &&
                kappa.size() == fraction.size(),
            ErrorKind::kInvalidInput, "class threshold vectors differ in length");
    double total = 0.0;
    for (double a : fraction) {
      require(a >= 0.0, ErrorKind::kInvalidInput, "class fractions must be non-negative");
      total += a;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kInvalidInput,
            "class fractions must sum to 1");
  }
};

/// { i : f_i* > kappa_{class(i)} }. Depends on the fading only, never on path loss.
inline std::vector<std::size_t> select_users(const SlotChannel& channel,
                                             const ClassThresholds& thresholds,
                                             std::span<const UserState> users) {
  require(users.size() == channel.users(), ErrorKind::kInvalidInput,
          "user count differs from channel rows");
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < users.size(); ++i) {
    require(users[i].class_id < thresholds.classes(), ErrorKind::kInvalidInput,
            "user " + std::to_string(i) + " has an unknown class");
    if (channel.best(i) > thresholds.kappa[users[i].class_id]) selected.push_back(i);
  }
  return selected;
}

/// Serves the whole queue of every selected user. Returns the per-user rate
/// vector (zero for unselected users) and empties the selected queues.
inline std::vector<double> flush_rates(std::span<UserState> users,
                                       std::span<const std::size_t> selected) {
  std::vector<double> rates(users.size(), 0.0);
  for (std::size_t i : selected) {
    rates[i] = users[i].queue;
    users[i].queue = 0.0;
  }
  return rates;
}

/// Best band of each selected user, in the order of `selected`.
inline std::vector<std::size_t> assign_bands(const SlotChannel& channel,
                                             std::span<const std::size_t> selected) {
  std::vector<std::size_t> bands;
  bands.reserve(selected.size());
  for (std::size_t i : selected) bands.push_back(channel.best_band(i));
  return bands;
}

/// Applies the optimal allocation independently on each band to the users
/// assigned there, with gains d_i = s_i * f_i^{band(i)}. Returns energies in
/// the order of decision.selected.
inline std::vector<double> slot_power(const SlotChannel& channel,
                                      std::span<const UserState> users,
                                      const ScheduleDecision& decision, double n0) {
  const std::size_t n = decision.selected.size();
  require(decision.rate.size() == n && decision.band.size() == n, ErrorKind::kInvalidInput,
          "inconsistent schedule decision");
  std::vector<double> energy(n, 0.0);
  std::vector<double> gains;
  std::vector<double> rates;
  std::vector<std::size_t> slots;
  for (std::size_t m = 0; m < channel.bands(); ++m) {
    gains.clear();
    rates.clear();
    slots.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (decision.band[j] != m) continue;
      const std::size_t user = decision.selected[j];
      gains.push_back(users[user].pathloss * channel.at(user, m));
      rates.push_back(decision.rate[j]);
      slots.push_back(j);
    }
    if (slots.empty()) continue;
    const auto powers = optimal_allocation(gains, rates, n0);
    for (std::size_t k = 0; k < slots.size(); ++k) energy[slots[k]] = powers.energy[k];
  }
  return energy;
}

/// One full slot: select, flush, assign bands, allocate energy. Arrivals for
/// the slot must already be in the queues.
inline ScheduleDecision schedule_slot(const SlotChannel& channel,
                                      const ClassThresholds& thresholds,
                                      std::span<UserState> users, double n0) {
  ScheduleDecision decision;
  decision.selected = select_users(channel, thresholds, users);
  const auto rates = flush_rates(users, decision.selected);
  decision.rate.reserve(decision.selected.size());
  for (std::size_t i : decision.selected) {
    decision.rate.push_back(rates[i]);
    users[i].last_service_slot = channel.slot();
  }
  decision.band = assign_bands(channel, decision.selected);
  decision.energy = slot_power(channel, users, decision, n0);
  return decision;
}

}  // namespace ospc
