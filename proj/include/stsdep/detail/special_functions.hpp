#ifndef STSDEP_DETAIL_SPECIAL_FUNCTIONS_HPP_
#define STSDEP_DETAIL_SPECIAL_FUNCTIONS_HPP_

// Regularized incomplete gamma functions and the standard normal CDF, in the
// series / continued-fraction form used by the reference battery code.

#include <cmath>
#include <limits>
#include <string>

#include "stsdep/errors.hpp"

namespace stsdep::math {

inline constexpr double kMachineEpsilon = 1.11022302462515654042e-16;  // 2^-53
inline constexpr double kMaxLog = 7.09782712893383996732e2;
inline constexpr int kMaxIterations = 1'000'000;

namespace detail {

inline void check_args(double a, double x, const char* fn) {
  if (!std::isfinite(a) || !std::isfinite(x)) {
    throw Error(ErrorCode::NumericalFailure,
                std::string(fn) + ": non-finite argument (a=" + std::to_string(a) +
                    ", x=" + std::to_string(x) + ")");
  }
}

[[noreturn]] inline void no_convergence(const char* fn, double a, double x) {
  throw Error(ErrorCode::NumericalFailure, std::string(fn) + " did not converge (a=" +
                                               std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

// log(x^a e^-x / Gamma(a))
inline double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

inline double igam_series(double a, double x) {
  const double ax = log_prefactor(a, x);
  if (ax < -kMaxLog) return 0.0;
  double r = a, c = 1.0, ans = 1.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    r += 1.0;
    c *= x / r;
    ans += c;
    if (c / ans <= kMachineEpsilon) return ans * std::exp(ax) / a;
  }
  no_convergence("igam", a, x);
}

inline double igamc_fraction(double a, double x) {
  constexpr double big = 4.503599627370496e15;
  constexpr double biginv = 2.22044604925031308085e-16;
  const double ax = log_prefactor(a, x);
  if (ax < -kMaxLog) return 0.0;
  double y = 1.0 - a, z = x + y + 1.0, c = 0.0;
  double pkm2 = 1.0, qkm2 = x, pkm1 = x + 1.0, qkm1 = z * x;
  double ans = pkm1 / qkm1;
  for (int it = 0; it < kMaxIterations; ++it) {
    c += 1.0;
    y += 1.0;
    z += 2.0;
    const double yc = y * c;
    const double pk = pkm1 * z - pkm2 * yc;
    const double qk = qkm1 * z - qkm2 * yc;
    double t = 1.0;
    if (qk != 0) {
      const double r = pk / qk;
      t = std::fabs((ans - r) / r);
      ans = r;
    }
    pkm2 = pkm1;
    pkm1 = pk;
    qkm2 = qkm1;
    qkm1 = qk;
    if (std::fabs(pk) > big) {
      pkm2 *= biginv;
      pkm1 *= biginv;
      qkm2 *= biginv;
      qkm1 *= biginv;
    }
    if (t <= kMachineEpsilon) return ans * std::exp(ax);
  }
  no_convergence("igamc", a, x);
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double igam(double a, double x) {
  detail::check_args(a, x, "igam");
  if (x <= 0 || a <= 0) return 0.0;
  if (x > 1.0 && x > a) return 1.0 - detail::igamc_fraction(a, x);
  return detail::igam_series(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double igamc(double a, double x) {
  detail::check_args(a, x, "igamc");
  if (x <= 0 || a <= 0) return 1.0;
  if (x < 1.0 || x < a) return 1.0 - detail::igam_series(a, x);
  return detail::igamc_fraction(a, x);
}

inline double normal_cdf(double x) {
  constexpr double sqrt2 = 1.414213562373095048801688724209698078569672;
  return x > 0 ? 0.5 * (1 + std::erf(x / sqrt2)) : 0.5 * (1 - std::erf(-x / sqrt2));
}

inline double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934381868;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace stsdep::math

#endif  // STSDEP_DETAIL_SPECIAL_FUNCTIONS_HPP_
