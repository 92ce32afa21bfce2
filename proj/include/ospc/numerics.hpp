#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ospc/error.hpp"

namespace ospc::numerics {

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod on a finite interval with a smooth integrand.
template <class F>
Integral integrate(F&& f, double a, double b, double tolerance = 1e-10,
                   unsigned max_depth = 20) {
  if (!(b > a)) return {};
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, tolerance, &error);
  return {value, error};
}

/// Gauss-Kronrod to an absolute error target. A relative target below the
/// rounding floor makes the adaptive scheme subdivide to its depth limit, which
/// happens for small integrals of O(1) quantities.
template <class F>
Integral integrate_absolute(F&& f, double a, double b, double abs_tolerance,
                            unsigned max_depth = 20) {
  if (!(b > a)) return {};
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0;
  const double coarse = GK::integrate(f, a, b, 0, 0.0, &error);
  if (error <= abs_tolerance) return {coarse, error};
  const double rel = std::max(abs_tolerance / std::max(std::abs(coarse), 1e-300), 1e-15);
  const double value = GK::integrate(f, a, b, max_depth, rel, &error);
  return {value, error};
}

/// Tanh-sinh quadrature; tolerates integrable endpoint singularities and never
/// evaluates the integrand at the endpoints.
template <class F>
Integral integrate_endpoint_singular(F&& f, double a, double b,
                                     double tolerance = 1e-10) {
  if (!(b > a)) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double value = integrator.integrate(f, a, b, tolerance, &error, &l1, &levels);
  return {value, error * std::max(1.0, std::abs(l1))};
}

/// Smallest x in [lo, hi] with f(x) >= target for a non-decreasing f, to
/// relative precision `rel_tol`. Steps geometrically while the bracket spans
/// more than a factor of two so that brackets starting at zero converge fast.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi,
                         double rel_tol = 1e-12, int max_iter = 400) {
  require(lo >= 0.0 && hi > lo, ErrorKind::kInvalidInput, "bisection bracket");
  for (int it = 0; it < max_iter; ++it) {
    if (hi - lo <= rel_tol * hi) return 0.5 * (lo + hi);
    if (lo == 0.0 && hi <= 1e-300) return hi;
    double mid;
    if (lo > 0.0 && hi / lo > 2.0) {
      mid = std::sqrt(lo * hi);
    } else if (lo == 0.0) {
      mid = std::max(hi * 1e-3, 1e-300);
      if (f(mid) >= target) {
        hi = mid;
        continue;
      }
      lo = mid;
      continue;
    } else {
      mid = 0.5 * (lo + hi);
    }
    if (f(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  fail(ErrorKind::kNoConvergence, "bisection did not reach tolerance");
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace ospc::numerics
