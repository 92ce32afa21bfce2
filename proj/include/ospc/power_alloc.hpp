#pragma once

// Minimum-sum-energy power allocation for superposition coding with
// successive decoding on a Gaussian multi-access channel. Rates are in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ospc/error.hpp"

namespace ospc {

/// Per-user transmit energies and the noise density they were computed for.
struct PowerVector {
  std::vector<double> energy;
  double n0 = 1.0;

  double sum() const { return std::accumulate(energy.begin(), energy.end(), 0.0); }
};

namespace detail {

inline void check_gains_and_rates(std::span<const double> gains, std::span<const double> rates,
                                  double n0) {
  require(gains.size() == rates.size(), ErrorKind::kInvalidInput,
          "gain and rate vectors differ in length");
  require(n0 > 0.0 && std::isfinite(n0), ErrorKind::kInvalidInput, "N0 must be positive");
  for (std::size_t i = 0; i < gains.size(); ++i) {
    require(gains[i] > 0.0 && std::isfinite(gains[i]), ErrorKind::kInvalidInput,
            "channel gain " + std::to_string(i) + " is not strictly positive and finite");
    require(rates[i] >= 0.0, ErrorKind::kInvalidInput,
            "rate " + std::to_string(i) + " is negative");
  }
}

}  // namespace detail

/// Users ordered by ascending gain; equal gains keep index order.
inline std::vector<std::size_t> ascending_gain_order(std::span<const double> gains) {
  std::vector<std::size_t> order(gains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] < gains[b]; });
  return order;
}

/// Energies needed when users are decoded so that order[0] sees the most
/// interference: E_{pi_i} = N0/d_{pi_i} * exp(sum_{k<i} rho_{pi_k}) * (exp(rho_{pi_i}) - 1).
inline std::vector<double> energy_chain(std::span<const double> gains,
                                        std::span<const double> rates, double n0,
                                        std::span<const std::size_t> order) {
  std::vector<double> energy(gains.size(), 0.0);
  double cumulative = 0.0;
  for (std::size_t user : order) {
    energy[user] = n0 / gains[user] * std::exp(cumulative) * std::expm1(rates[user]);
    cumulative += rates[user];
  }
  return energy;
}

inline PowerVector optimal_allocation(std::span<const double> gains,
                                      std::span<const double> rates, double n0) {
  detail::check_gains_and_rates(gains, rates, n0);
  const auto order = ascending_gain_order(gains);
  return {energy_chain(gains, rates, n0, order), n0};
}

struct DecodeOrderResult {
  std::vector<std::size_t> order;
  double min_sum_energy = 0.0;
};

/// Exhaustive search over all decoding orders (K <= 10). Starts from the
/// ascending-gain order and only moves away from it on a strict improvement
/// beyond rounding.
inline DecodeOrderResult decode_order_oracle(std::span<const double> gains,
                                             std::span<const double> rates, double n0) {
  detail::check_gains_and_rates(gains, rates, n0);
  require(gains.size() <= 10, ErrorKind::kTooLarge, "decode-order enumeration limited to K <= 10");
  auto sum_of = [&](std::span<const std::size_t> order) {
    const auto e = energy_chain(gains, rates, n0, order);
    return std::accumulate(e.begin(), e.end(), 0.0);
  };
  DecodeOrderResult best{ascending_gain_order(gains), 0.0};
  best.min_sum_energy = sum_of(best.order);
  std::vector<std::size_t> perm(gains.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    const double candidate = sum_of(perm);
    if (candidate < best.min_sum_energy * (1.0 - 1e-12)) best = {perm, candidate};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Slack of the full-set capacity constraint, log(1 + sum d_i E_i / N0) - sum rho_i.
inline double full_set_slack(std::span<const double> gains, const PowerVector& powers,
                             std::span<const double> rates) {
  double received = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) received += gains[i] * powers.energy[i];
  const double total_rate = std::accumulate(rates.begin(), rates.end(), 0.0);
  return std::log1p(received / powers.n0) - total_rate;
}

/// True iff every non-empty subset S satisfies
/// sum_{S} rho_i <= log(1 + sum_{S} d_i E_i / N0) + 1e-9.
inline bool capacity_region_check(std::span<const double> gains, const PowerVector& powers,
                                  std::span<const double> rates) {
  const std::size_t k = gains.size();
  require(rates.size() == k && powers.energy.size() == k, ErrorKind::kInvalidInput,
          "gain, power and rate vectors differ in length");
  require(k <= 20, ErrorKind::kTooLarge, "subset enumeration limited to K <= 20");
  const std::size_t subsets = std::size_t{1} << k;
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    double rate = 0.0;
    double received = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::size_t{1} << i)) {
        rate += rates[i];
        received += gains[i] * powers.energy[i];
      }
    }
    if (rate > std::log1p(received / powers.n0) + 1e-9) return false;
  }
  return true;
}

/// Both sides of sum_i log(1 + a_i / (Z + sum_{u<i} a_u)) = log(1 + sum_i a_i / Z).
inline std::pair<double, double> sum_rate_identity(std::span<const double> a, double z) {
  require(z > 0.0, ErrorKind::kInvalidInput, "Z must be positive");
  double left = 0.0;
  double partial = 0.0;
  for (double ai : a) {
    require(ai >= 0.0, ErrorKind::kInvalidInput, "sequence must be non-negative");
    left += std::log1p(ai / (z + partial));
    partial += ai;
  }
  return {left, std::log1p(partial / z)};
}

/// Sum energies along the rate-exchange sequence that carries rho into
/// rho_prime one user at a time (gains ascending, rho prefix-dominates
/// rho_prime). Step u sets user u to its target rate and pushes the
/// difference onto user u+1. Entry 0 is the sum energy of rho, the last entry
/// that of rho_prime.
inline std::vector<double> rate_exchange_trace(std::span<const double> rho,
                                                  std::span<const double> rho_prime,
                                                  std::span<const double> gains, double n0) {
  detail::check_gains_and_rates(gains, rho, n0);
  detail::check_gains_and_rates(gains, rho_prime, n0);
  const std::size_t k = gains.size();
  require(std::is_sorted(gains.begin(), gains.end()), ErrorKind::kInvalidInput,
          "gains must be sorted ascending");
  double prefix = 0.0;
  double prefix_prime = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    prefix += rho[i];
    prefix_prime += rho_prime[i];
    require(prefix >= prefix_prime - 1e-12 * std::max(1.0, prefix), ErrorKind::kDominanceViolation,
            "prefix sum " + std::to_string(i + 1) + " of rho is below that of rho'");
  }

  std::vector<double> current(rho.begin(), rho.end());
  std::vector<double> trace;
  trace.reserve(k + 1);
  trace.push_back(optimal_allocation(gains, current, n0).sum());
  for (std::size_t u = 0; u < k; ++u) {
    const double moved = current[u] - rho_prime[u];
    current[u] = rho_prime[u];
    if (u + 1 < k) {
      current[u + 1] += moved;
      // Can only go negative through rounding when the inputs are valid.
      require(current[u + 1] >= -1e-12, ErrorKind::kDominanceViolation,
              "intermediate rate became negative");
      current[u + 1] = std::max(0.0, current[u + 1]);
    }
    trace.push_back(optimal_allocation(gains, current, n0).sum());
  }
  return trace;
}

}  // namespace ospc
