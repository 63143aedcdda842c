#pragma once

// Regularized upper incomplete gamma function, evaluated in the log domain so
// that tail probabilities far below the double range stay meaningful.

#include <algorithm>
#include <cmath>
#include <limits>

#include "firmsaudit/error.hpp"

namespace firmsaudit {

struct TailProbability {
  double p{};      // clamped to the smallest positive double on underflow
  double log_p{};  // natural log, exact even when p underflows
};

namespace detail {

inline constexpr int kGammaMaxIterations = 100000;
inline constexpr double kGammaEps = 1e-16;

// log of the common prefactor x^a e^-x / Gamma(a)
inline double log_gamma_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// Series for the lower function P(a, x), valid for x < a + 1.
inline double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum;
}

// Continued fraction for the upper function Q(a, x) (modified Lentz), valid
// for x >= a + 1. Returns the fraction without the prefactor.
inline double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return h;
}

}  // namespace detail

/// Q(a, x) = Gamma(a, x) / Gamma(a) for a > 0, x >= 0.
inline TailProbability regularized_gamma_q(double a, double x) {
  if (!(a > 0) || !(x >= 0)) throw AuditError(ErrorCode::InvalidArgument, "regularized_gamma_q needs a > 0, x >= 0");
  if (x == 0) return {1.0, 0.0};
  double log_q{};
  if (x < a + 1.0) {
    const double lower = std::exp(detail::log_gamma_prefactor(a, x)) * detail::lower_gamma_series(a, x);
    log_q = std::log1p(-std::min(lower, 1.0));
  } else {
    log_q = detail::log_gamma_prefactor(a, x) + std::log(detail::upper_gamma_fraction(a, x));
  }
  double q = std::exp(log_q);
  if (q == 0.0) q = std::numeric_limits<double>::denorm_min();
  return {q, log_q};
}

/// Upper-tail probability of the chi-square distribution with `df` degrees of
/// freedom.
inline TailProbability chi_square_sf(double x, int df) {
  if (df < 1) throw AuditError(ErrorCode::InvalidArgument, "chi_square_sf needs df >= 1");
  if (!(x >= 0)) throw AuditError(ErrorCode::InvalidArgument, "chi_square_sf needs x >= 0");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace firmsaudit
