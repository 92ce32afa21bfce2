#pragma once

// Large-population (mean-field) delay and energy of the threshold policy,
// its bounds and limits, and the proportional-fair baseline.
//
// Internally every rate is in nats. With M bands the per-band demand is
// Gamma / M, and all path-loss expectations below use that per-band demand.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ospc/channel_models.hpp"
#include "ospc/error.hpp"
#include "ospc/numerics.hpp"
#include "ospc/random.hpp"

namespace ospc {

enum class RateUnit { kNats, kBits };

inline std::string_view to_string(RateUnit unit) {
  return unit == RateUnit::kNats ? "nats" : "bits";
}

/// Rate expressed in nats, converted to `unit`.
inline double rate_in(RateUnit unit, double nats) {
  return unit == RateUnit::kNats ? nats : nats / std::numbers::ln2;
}

/// Energy per nat, converted to energy per `unit`.
inline double efficiency_in(RateUnit unit, double per_nat) {
  return unit == RateUnit::kNats ? per_nat : per_nat * std::numbers::ln2;
}

struct AnalysisConfig {
  double spectral_efficiency;  // Gamma, nats per channel use, whole system
  ConditionalChannelLaw channel;
  RateUnit rate_unit = RateUnit::kNats;

  int bands() const { return channel.bands(); }
  double per_band_demand() const { return spectral_efficiency / bands(); }

  AnalysisConfig with_kappa(double kappa) const {
    return {spectral_efficiency,
            ConditionalChannelLaw(channel.pathloss(), channel.fading(), kappa), rate_unit};
  }

  void validate() const {
    require(spectral_efficiency > 0.0 && std::isfinite(spectral_efficiency),
            ErrorKind::kInvalidInput, "spectral efficiency must be positive");
  }
};

enum class EnergyMethod { kQuadrature, kMonteCarlo, kClosedForm };

inline std::string_view to_string(EnergyMethod m) {
  switch (m) {
    case EnergyMethod::kQuadrature: return "quadrature";
    case EnergyMethod::kMonteCarlo: return "monte-carlo";
    case EnergyMethod::kClosedForm: return "closed-form";
  }
  return "unknown";
}

/// Linear (Eb/N0)_sys in energy per nat.
struct EnergyResult {
  double value = 0.0;
  double value_db = 0.0;
  EnergyMethod method = EnergyMethod::kQuadrature;
  double estimated_error = 0.0;

  static EnergyResult make(double value, EnergyMethod method, double error) {
    return {value, numerics::to_db(value), method, error};
  }
};

/// Mean delay 1/gamma in slots.
inline double delay_of_kappa(const ConditionalChannelLaw& channel) { return 1.0 / channel.gamma(); }

/// True when E[1/d] is infinite: the selected fading has positive density at 0.
inline bool energy_diverges(const ConditionalChannelLaw& channel) {
  return channel.support_inf() == 0.0 && channel.bands() == 1;
}

/// Integral of (1/x) exp((Gamma/M) F(x)) dF(x) over the selected users'
/// channel law F, evaluated in quantile space as the integral over u in (0,1)
/// of exp((Gamma/M) u) / F^{-1}(u).
inline EnergyResult energy_efficiency(const AnalysisConfig& cfg) {
  cfg.validate();
  if (energy_diverges(cfg.channel)) {
    return {kInf, kInf, EnergyMethod::kQuadrature, 0.0};
  }
  const double c = cfg.per_band_demand();
  const auto& law = cfg.channel;
  if (!law.has_closed_form()) {
    // By parts with G = (e^{cF} - 1) / c: the integral of (1/x) dG equals
    // G(x_max) / x_max plus the integral of G(x) / x^2, taken over t = log x
    // and split where F has kinks (support ends scaled by the path-loss range).
    auto g_of = [&](double x) { return std::expm1(c * conditional_channel_cdf(law, x)) / c; };
    auto integrand = [&](double t) {
      const double x = std::exp(t);
      if (x <= 0.0) return 0.0;
      const double g = g_of(x);
      return g > 0.0 ? g / x : 0.0;
    };
    const auto& fading = law.fading();
    const double gain_max = law.pathloss().max_gain();
    std::vector<double> cuts;
    for (double end : {law.support_inf(), fading.support_sup()}) {
      if (end > 0.0 && std::isfinite(end)) {
        cuts.push_back(std::log(end));
        cuts.push_back(std::log(end * gain_max));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double lo = law.support_inf() > 0.0 ? std::log(law.support_inf()) : -kInf;
    const double hi = fading.bounded() ? std::log(fading.support_sup() * gain_max) : kInf;
    std::vector<double> nodes{lo};
    for (double t : cuts) {
      if (t > lo && t < hi) nodes.push_back(t);
    }
    nodes.push_back(hi);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = std::isfinite(hi) ? g_of(std::exp(hi)) / std::exp(hi) : 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      double e = 0.0;
      total += GK::integrate(integrand, nodes[i], nodes[i + 1], 15, 1e-11, &e);
      error += e;
    }
    return EnergyResult::make(total, EnergyMethod::kQuadrature, error);
  }
  const auto integral = numerics::integrate_endpoint_singular(
      [&](double u) {
        if (u >= 1.0) return 0.0;
        return std::exp(c * u) / conditional_channel_quantile(law, u);
      },
      0.0, 1.0, 1e-10);
  return EnergyResult::make(integral.value, EnergyMethod::kQuadrature, integral.error);
}

/// Sample mean of exp((Gamma/M) F(d)) / d over d drawn from the selected
/// users' channel law. estimated_error is one standard error.
inline EnergyResult energy_efficiency_monte_carlo(const AnalysisConfig& cfg, std::size_t samples,
                                                  std::uint64_t seed) {
  cfg.validate();
  require(samples >= 2, ErrorKind::kInvalidInput, "need at least two samples");
  Rng rng(seed);
  const double c = cfg.per_band_demand();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= samples; ++n) {
    const double d = sample_conditional_channel(cfg.channel, rng);
    const double v = std::exp(c * conditional_channel_cdf(cfg.channel, d)) / d;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double stderr_ = std::sqrt(m2 / static_cast<double>(samples - 1) /
                                   static_cast<double>(samples));
  return EnergyResult::make(mean, EnergyMethod::kMonteCarlo, stderr_);
}

/// E_Psi[exp(c Psi(S)) / S] by quadrature over the radius.
inline double pathloss_exp_expectation(const PathLossLaw& pathloss, double c) {
  return pathloss
      .expect([&](double s, double r) { return std::exp(c * pathloss.cdf_at_radius(r)) / s; })
      .value;
}

struct UpperBounds {
  double bound1;  // (1/kappa) E_Psi[exp(c Psi(S)) / S]
  double bound2;  // exp(c) E_Psi[1/S] / kappa
};

/// O(1/kappa) upper bounds on the energy, c = Gamma / M.
inline UpperBounds energy_upper_bound(const AnalysisConfig& cfg) {
  cfg.validate();
  const double kappa = cfg.channel.kappa();
  require(kappa > 0.0, ErrorKind::kInvalidInput, "upper bounds need kappa > 0");
  const double c = cfg.per_band_demand();
  const auto& pl = cfg.channel.pathloss();
  return {pathloss_exp_expectation(pl, c) / kappa,
          std::exp(c) * mean_inverse_pathloss(pl) / kappa};
}

namespace detail {
inline double fading_supremum(const AnalysisConfig& cfg) {
  const double b = cfg.channel.fading().support_sup();
  require(std::isfinite(b), ErrorKind::kUnboundedSupport,
          "bound needs fading with bounded support");
  return b;
}
}  // namespace detail

/// Energy floor for any policy when the fading is bounded by B:
/// (1/B) E_Psi[exp(c Psi(S)) / S].
inline EnergyResult energy_lower_bound(const AnalysisConfig& cfg) {
  cfg.validate();
  const double b = detail::fading_supremum(cfg);
  return EnergyResult::make(pathloss_exp_expectation(cfg.channel.pathloss(), cfg.per_band_demand()) / b,
                            EnergyMethod::kQuadrature, 0.0);
}

/// Energy of serving one best-fading (= B) user per slot:
/// (e^c - 1) / (c B) * E_Psi[1/S].
inline double single_user_limit(const AnalysisConfig& cfg) {
  cfg.validate();
  const double b = detail::fading_supremum(cfg);
  const double c = cfg.per_band_demand();
  return std::expm1(c) / (c * b) * mean_inverse_pathloss(cfg.channel.pathloss());
}

// ---------------------------------------------------------------------------
// Proportional-fair baseline

/// 1 - F(x) for the product of path loss and the best of K unit-mean
/// exponential fades, square-law path loss.
inline double pfs_channel_ccdf(const PathLossLaw& pathloss, int users, double x) {
  require(users >= 1, ErrorKind::kInvalidInput, "PFS needs at least one user");
  if (x <= 0.0) return 1.0;
  if (pathloss.alpha() != 2.0) {
    const ConditionalChannelLaw law(pathloss, FadingLaw::exp_unit_mean(users), 0.0);
    return 1.0 - conditional_channel_cdf_numeric(law, x);
  }
  const double d2 = pathloss.delta() * pathloss.delta();
  double sum = 0.0;
  const double a = -std::expm1(-x);
  const double b = -std::expm1(-x * d2);
  double pa = 1.0;
  double pb = 1.0;
  for (int i = 1; i <= users; ++i) {
    pa *= a;
    pb *= b;
    sum += (pa - pb) / i;
  }
  return std::clamp(sum / (x * (1.0 - d2)), 0.0, 1.0);
}

inline double pfs_channel_cdf(const PathLossLaw& pathloss, int users, double x) {
  return 1.0 - pfs_channel_ccdf(pathloss, users, x);
}

struct PfsPoint {
  double snr;
  double capacity_bits;  // bits per channel use
  double ebn0_per_bit;   // SNR / C
};

/// Ergodic spectral efficiency of serving the single best user,
/// C = E[log2(1 + x SNR)], integrated by parts against the channel CDF.
inline double pfs_capacity_bits(const PathLossLaw& pathloss, int users, double snr) {
  require(snr > 0.0, ErrorKind::kInvalidInput, "SNR must be positive");
  auto integrand = [&](double x) {
    return pfs_channel_ccdf(pathloss, users, x) * snr / (1.0 + x * snr);
  };
  const double split = pathloss.max_gain();
  const double head = numerics::integrate(integrand, 0.0, split, 1e-11).value;
  double tail_error = 0.0;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, split, std::numeric_limits<double>::infinity(), 20, 1e-11, &tail_error);
  return (head + tail) / std::numbers::ln2;
}

inline std::vector<PfsPoint> pfs_curve(std::span<const double> snr_grid, int users,
                                       const PathLossLaw& pathloss) {
  std::vector<PfsPoint> curve;
  curve.reserve(snr_grid.size());
  for (double snr : snr_grid) {
    const double c = pfs_capacity_bits(pathloss, users, snr);
    curve.push_back({snr, c, snr / c});
  }
  return curve;
}

/// Logarithmic SNR grid, endpoints in dB inclusive.
inline std::vector<double> snr_grid_db(double lo_db, double hi_db, std::size_t points) {
  require(points >= 2 && hi_db > lo_db, ErrorKind::kInvalidInput, "bad SNR grid");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double db = lo_db + (hi_db - lo_db) * static_cast<double>(i) /
                                  static_cast<double>(points - 1);
    grid[i] = std::pow(10.0, db / 10.0);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Delay-energy tradeoff

struct TradeoffRow {
  double delay;
  double kappa;
  double gamma;
  double ebn0;  // per nat, linear
  double ebn0_db;
};

/// Rows sorted by delay; kappa is the largest threshold meeting each delay.
inline std::vector<TradeoffRow> tradeoff_table(std::vector<double> delays,
                                               const AnalysisConfig& cfg) {
  std::sort(delays.begin(), delays.end());
  std::vector<TradeoffRow> rows;
  rows.reserve(delays.size());
  for (double d : delays) {
    const double kappa = kappa_for_delay(cfg.channel.fading(), d);
    const auto at = cfg.with_kappa(kappa);
    const auto e = energy_efficiency(at);
    rows.push_back({d, kappa, at.channel.gamma(), e.value, e.value_db});
  }
  return rows;
}

/// Mean-field energy with per-class thresholds: the fraction-weighted sum of
/// the single-class energies.
inline double class_weighted_energy(const AnalysisConfig& cfg, std::span<const double> kappas,
                                    std::span<const double> fractions) {
  require(kappas.size() == fractions.size() && !kappas.empty(), ErrorKind::kInvalidInput,
          "need one fraction per class");
  double total = 0.0;
  for (std::size_t l = 0; l < kappas.size(); ++l) {
    total += fractions[l] * energy_efficiency(cfg.with_kappa(kappas[l])).value;
  }
  return total;
}

}  // namespace ospc
