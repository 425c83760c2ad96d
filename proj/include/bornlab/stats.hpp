#pragma once

/// Chi-square tail probabilities via the regularized incomplete gamma
/// function: series expansion below the a+1 crossover, Lentz continued
/// fraction above it.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bornlab {

namespace detail {

inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("regularized_gamma: series did not converge");
}

inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("regularized_gamma: continued fraction did not converge");
}

}  // namespace detail

/// Q(a, x) = Gamma(a, x) / Gamma(a), the upper regularized incomplete gamma.
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x)) {
    throw std::invalid_argument("regularized_gamma_q: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

/// Survival function of the chi-square distribution with dof degrees of
/// freedom. dof = 0 denotes the degenerate single-cell case.
inline double chi_square_p_value(double chi_square, int dof) {
  if (dof < 0) throw std::invalid_argument("chi_square_p_value: dof must be >= 0");
  if (!(chi_square >= 0.0)) {
    if (std::isinf(chi_square)) return 0.0;
    throw std::invalid_argument("chi_square_p_value: statistic must be >= 0");
  }
  if (dof == 0) return 1.0;
  if (std::isinf(chi_square)) return 0.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * chi_square);
}

}  // namespace bornlab
