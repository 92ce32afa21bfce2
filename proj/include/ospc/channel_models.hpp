#pragma once

// Path-loss and short-term fading distributions, and the channel law of a
// randomly placed user conditioned on being selected by the threshold rule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include "ospc/error.hpp"
#include "ospc/numerics.hpp"
#include "ospc/random.hpp"

namespace ospc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Path loss of a user placed uniformly on the annulus [delta, 1] of a unit
/// cell, s = r^(-alpha). Normalized to unit gain at the cell border.
class PathLossLaw {
 public:
  PathLossLaw(double alpha, double delta) : alpha_(alpha), delta_(delta) {
    require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::kInvalidInput,
            "path-loss exponent must be positive");
    require(delta > 0.0 && delta < 1.0, ErrorKind::kInvalidInput,
            "forbidden-region radius must lie in (0, 1)");
  }

  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double max_gain() const { return std::pow(delta_, -alpha_); }

  double gain_at_radius(double r) const { return std::pow(r, -alpha_); }

  /// Radius density on [delta, 1].
  double radius_density(double r) const { return 2.0 * r / (1.0 - delta_ * delta_); }

  /// Psi evaluated at the gain of a user at radius r: P{S <= s(r)} = P{R >= r}.
  double cdf_at_radius(double r) const {
    return (1.0 - r * r) / (1.0 - delta_ * delta_);
  }

  /// E[g(S)], integrated over the radius (smooth) rather than the gain.
  template <class G>
  numerics::Integral expect(G&& g, double tolerance = 1e-12) const {
    return numerics::integrate(
        [&](double r) { return g(gain_at_radius(r), r) * radius_density(r); }, delta_,
        1.0, tolerance);
  }

  friend bool operator==(const PathLossLaw&, const PathLossLaw&) = default;

 private:
  double alpha_;
  double delta_;
};

/// Rayleigh fading: unit-mean exponential power gain, i.i.d. over `bands`.
struct ExpUnitMean {
  int bands = 1;
  friend bool operator==(const ExpUnitMean&, const ExpUnitMean&) = default;
};

/// Single-band heavy tail: P{f <= x} = 1 - x^(1 - alpha_f) for x >= 1.
struct ParetoTail {
  double alpha_f = 2.0;
  friend bool operator==(const ParetoTail&, const ParetoTail&) = default;
};

/// Uniform on [0, sup], i.i.d. over `bands`.
struct BoundedUniform {
  double sup = 1.0;
  int bands = 1;
  friend bool operator==(const BoundedUniform&, const BoundedUniform&) = default;
};

class FadingLaw {
 public:
  using Variant = std::variant<ExpUnitMean, ParetoTail, BoundedUniform>;

  static FadingLaw exp_unit_mean(int bands) { return FadingLaw(ExpUnitMean{bands}); }
  static FadingLaw pareto_tail(double alpha_f) { return FadingLaw(ParetoTail{alpha_f}); }
  static FadingLaw bounded_uniform(double sup, int bands = 1) {
    return FadingLaw(BoundedUniform{sup, bands});
  }

  explicit FadingLaw(Variant v) : v_(v) {
    std::visit(
        [](const auto& law) {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ParetoTail>) {
            require(law.alpha_f > 1.0 && std::isfinite(law.alpha_f), ErrorKind::kInvalidInput,
                    "Pareto tail exponent must exceed 1");
          } else {
            require(law.bands >= 1, ErrorKind::kInvalidInput, "band count must be >= 1");
            if constexpr (std::is_same_v<T, BoundedUniform>) {
              require(law.sup > 0.0 && std::isfinite(law.sup), ErrorKind::kInvalidInput,
                      "uniform fading supremum must be positive");
            }
          }
        },
        v_);
  }

  const Variant& variant() const { return v_; }

  int bands() const {
    return std::visit(
        [](const auto& law) -> int {
          if constexpr (std::is_same_v<std::decay_t<decltype(law)>, ParetoTail>) {
            return 1;
          } else {
            return law.bands;
          }
        },
        v_);
  }

  bool is_exponential() const { return std::holds_alternative<ExpUnitMean>(v_); }

  /// Infimum of the support of one band (and of the best band).
  double support_inf() const { return std::holds_alternative<ParetoTail>(v_) ? 1.0 : 0.0; }

  double support_sup() const {
    if (const auto* u = std::get_if<BoundedUniform>(&v_)) return u->sup;
    return kInf;
  }

  bool bounded() const { return std::isfinite(support_sup()); }

  /// P{f* > x}, f* the best of the bands.
  double best_tail(double x) const {
    return std::visit(
        [x](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ExpUnitMean>) {
            if (x <= 0.0) return 1.0;
            // 1 - (1 - e^-x)^M without cancellation
            return -std::expm1(law.bands * std::log1p(-std::exp(-x)));
          } else if constexpr (std::is_same_v<T, ParetoTail>) {
            if (x <= 1.0) return 1.0;
            return std::pow(x, 1.0 - law.alpha_f);
          } else {
            if (x <= 0.0) return 1.0;
            if (x >= law.sup) return 0.0;
            return -std::expm1(law.bands * std::log(x / law.sup));
          }
        },
        v_);
  }

  /// P{f* <= x}.
  double best_cdf(double x) const {
    return std::visit(
        [x](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ExpUnitMean>) {
            if (x <= 0.0) return 0.0;
            return std::pow(-std::expm1(-x), law.bands);
          } else if constexpr (std::is_same_v<T, ParetoTail>) {
            if (x <= 1.0) return 0.0;
            return -std::expm1((1.0 - law.alpha_f) * std::log(x));
          } else {
            if (x <= 0.0) return 0.0;
            if (x >= law.sup) return 1.0;
            return std::pow(x / law.sup, law.bands);
          }
        },
        v_);
  }

  /// Largest x with P{f* > x} = v, for v in (0, 1].
  double best_tail_quantile(double v) const {
    return std::visit(
        [v](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ExpUnitMean>) {
            // (1 - e^-x)^M = 1 - v
            return -std::log(-std::expm1(std::log1p(-v) / law.bands));
          } else if constexpr (std::is_same_v<T, ParetoTail>) {
            return std::pow(v, -1.0 / (law.alpha_f - 1.0));
          } else {
            return law.sup * std::exp(std::log1p(-v) / law.bands);
          }
        },
        v_);
  }

  /// One band's fading gain.
  double sample_band(Rng& rng) const {
    return std::visit(
        [&rng](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ExpUnitMean>) {
            return rng.exponential();
          } else if constexpr (std::is_same_v<T, ParetoTail>) {
            return std::pow(rng.uniform_open(), -1.0 / (law.alpha_f - 1.0));
          } else {
            return law.sup * rng.uniform();
          }
        },
        v_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& law) -> std::string {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ExpUnitMean>) {
            return "exp(M=" + std::to_string(law.bands) + ")";
          } else if constexpr (std::is_same_v<T, ParetoTail>) {
            return "pareto(alpha_f=" + std::to_string(law.alpha_f) + ")";
          } else {
            return "uniform(B=" + std::to_string(law.sup) + ",M=" + std::to_string(law.bands) +
                   ")";
          }
        },
        v_);
  }

  friend bool operator==(const FadingLaw&, const FadingLaw&) = default;

 private:
  Variant v_;
};

// ---------------------------------------------------------------------------
// Path loss

inline double pathloss_cdf(const PathLossLaw& law, double x) {
  if (x <= 1.0) return 0.0;
  if (x >= law.max_gain()) return 1.0;
  const double d2 = law.delta() * law.delta();
  return 1.0 - (std::pow(x, -2.0 / law.alpha()) - d2) / (1.0 - d2);
}

/// Radius inversion: P{r <= y} = (y^2 - delta^2) / (1 - delta^2).
inline double sample_pathloss(const PathLossLaw& law, Rng& rng) {
  const double d2 = law.delta() * law.delta();
  const double r = std::sqrt(d2 + (1.0 - d2) * rng.uniform());
  return law.gain_at_radius(r);
}

/// E[1/S] by quadrature over the radius.
inline double mean_inverse_pathloss(const PathLossLaw& law) {
  return law.expect([](double s, double) { return 1.0 / s; }).value;
}

// ---------------------------------------------------------------------------
// Fading

inline double fading_best_cdf(const FadingLaw& law, double x) { return law.best_cdf(x); }

/// Selection probability P{f* > kappa}.
inline double gamma_of(const FadingLaw& law, double kappa) {
  require(kappa >= 0.0, ErrorKind::kInvalidInput, "threshold must be non-negative");
  const double g = law.best_tail(kappa);
  require(g > 0.0, ErrorKind::kDegeneratePolicy,
          "threshold at or above the fading support; no user is ever selected");
  return g;
}

/// Largest threshold whose selection probability is 1 / target_delay.
inline double kappa_for_delay(const FadingLaw& law, double target_delay) {
  require(target_delay >= 1.0 && std::isfinite(target_delay), ErrorKind::kUnattainableDelay,
          "target delay must be a finite number of slots >= 1");
  return std::max(0.0, law.best_tail_quantile(1.0 / target_delay));
}

/// P{f* <= x | f* > kappa}.
inline double conditional_fading_cdf(const FadingLaw& law, double kappa, double x) {
  const double g = gamma_of(law, kappa);
  if (x <= kappa) return 0.0;
  return std::clamp(1.0 - law.best_tail(x) / g, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Conditional channel d = s * f* given f* > kappa

class ConditionalChannelLaw {
 public:
  ConditionalChannelLaw(PathLossLaw pathloss, FadingLaw fading, double kappa)
      : pathloss_(pathloss), fading_(fading), kappa_(kappa), gamma_(gamma_of(fading, kappa)) {}

  const PathLossLaw& pathloss() const { return pathloss_; }
  const FadingLaw& fading() const { return fading_; }
  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }
  int bands() const { return fading_.bands(); }

  /// Infimum of the selected users' fading (and, with unit minimum path loss,
  /// of the channel).
  double support_inf() const { return std::max(kappa_, fading_.support_inf()); }

  /// Exponential fading with square-law path loss has a closed-form CDF.
  bool has_closed_form() const { return fading_.is_exponential() && pathloss_.alpha() == 2.0; }

 private:
  PathLossLaw pathloss_;
  FadingLaw fading_;
  double kappa_;
  double gamma_;
};

namespace detail {

/// sum_{i=1}^{M} (1 - e^-y)^i / i
inline double harmonic_power_sum(double y, int bands) {
  const double base = -std::expm1(-y);
  double power = 1.0;
  double sum = 0.0;
  for (int i = 1; i <= bands; ++i) {
    power *= base;
    sum += power / i;
  }
  return sum;
}

}  // namespace detail

/// Two-branch closed form for exponential fading and alpha = 2; the branch
/// switches at x = kappa / delta^2.
inline double conditional_channel_cdf_closed_form(const ConditionalChannelLaw& law, double x) {
  require(law.has_closed_form(), ErrorKind::kInvalidInput,
          "closed form needs exponential fading and alpha = 2");
  const double kappa = law.kappa();
  if (x <= kappa || x <= 0.0) return 0.0;
  const int m = law.bands();
  const double d2 = law.pathloss().delta() * law.pathloss().delta();
  const double scale = law.gamma() * x * (1.0 - d2);
  double value;
  if (x < kappa / d2) {
    value = (1.0 - kappa / x) / (1.0 - d2) -
            (detail::harmonic_power_sum(x, m) - detail::harmonic_power_sum(kappa, m)) / scale;
  } else {
    value = 1.0 -
            (detail::harmonic_power_sum(x, m) - detail::harmonic_power_sum(x * d2, m)) / scale;
  }
  return std::clamp(value, 0.0, 1.0);
}

/// P{s f* <= x | f* > kappa} by adaptive quadrature of the conditional fading
/// CDF against the radius density. Valid for every fading variant.
inline double conditional_channel_cdf_numeric(const ConditionalChannelLaw& law, double x) {
  if (x <= law.support_inf() || x <= 0.0) return 0.0;
  const auto& pl = law.pathloss();
  const auto& fading = law.fading();
  const double alpha = pl.alpha();
  // x * r^alpha crosses a kink of the conditional fading CDF at r = (b/x)^(1/alpha).
  auto radius_where = [&](double b) {
    return std::clamp(std::pow(b / x, 1.0 / alpha), pl.delta(), 1.0);
  };
  const double r_lo = radius_where(law.support_inf());
  double r_hi = 1.0;
  double saturated = 0.0;
  if (fading.bounded()) {
    r_hi = std::max(r_lo, radius_where(fading.support_sup()));
    saturated = pl.cdf_at_radius(r_hi);  // mass with conditional fading CDF = 1
  }
  const auto piece = numerics::integrate_absolute(
      [&](double r) {
        return conditional_fading_cdf(fading, law.kappa(), x * std::pow(r, alpha)) *
               pl.radius_density(r);
      },
      r_lo, r_hi, 1e-14);
  return std::clamp(piece.value + saturated, 0.0, 1.0);
}

inline double conditional_channel_cdf(const ConditionalChannelLaw& law, double x) {
  return law.has_closed_form() ? conditional_channel_cdf_closed_form(law, x)
                               : conditional_channel_cdf_numeric(law, x);
}

/// Inverse of conditional_channel_cdf by bisection, relative tolerance 1e-12.
inline double conditional_channel_quantile(const ConditionalChannelLaw& law, double u) {
  require(u >= 0.0 && u < 1.0, ErrorKind::kInvalidInput, "quantile level must lie in [0, 1)");
  const double lo = law.support_inf();
  if (u == 0.0) return lo;
  auto cdf = [&law](double x) { return conditional_channel_cdf(law, x); };
  double hi = std::max(lo, 1.0) * 2.0;
  for (int expand = 0; cdf(hi) < u; ++expand) {
    require(expand < 2000 && std::isfinite(hi), ErrorKind::kNoConvergence,
            "could not bracket the quantile");
    hi *= 2.0;
  }
  return numerics::bisect_increasing(cdf, u, lo, hi, 1e-13);
}

/// Draws s from the path-loss law and f* from the fading law given f* > kappa
/// (inverse CDF on the tail), and returns s * f*.
inline double sample_conditional_channel(const ConditionalChannelLaw& law, Rng& rng) {
  const double s = sample_pathloss(law.pathloss(), rng);
  const double f = law.fading().best_tail_quantile(law.gamma() * rng.uniform_open());
  return s * f;
}

}  // namespace ospc
