#pragma once

/// Functional-equation checkers for candidate weight functions, and
/// power-law exponent fitting.
///
/// Two distinct equations are covered and deliberately kept side by side:
///   additive argument:        f(a1 + a2) = f(a1) f(a2)   (exponentials)
///   multiplicative argument:  f(x1 * x2) = f(x1) f(x2)   (power laws)
/// A magnitude-power map |a|^p solves the second and generically fails the
/// first; the checkers quantify both facts instead of hiding either.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bornlab/amplitude.hpp"

namespace bornlab {

using AdditivePair = std::pair<Amplitude, Amplitude>;
using MagnitudePair = std::pair<double, double>;

/// Residual summary over a sample set. worst_case_inputs holds every sample
/// pair attaining max_residual.
template <typename Sample>
struct ResidualReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::size_t num_samples = 0;
  std::vector<Sample> worst_case_inputs;
};

namespace detail {

template <typename Sample>
ResidualReport<Sample> aggregate_residuals(std::span<const Sample> samples,
                                           const std::vector<double>& residuals) {
  ResidualReport<Sample> report;
  report.num_samples = samples.size();
  double sum = 0.0;
  for (double r : residuals) {
    sum += r;
    if (r > report.max_residual) report.max_residual = r;
  }
  report.mean_residual = sum / static_cast<double>(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (residuals[i] == report.max_residual) {
      report.worst_case_inputs.push_back(samples[i]);
    }
  }
  return report;
}

}  // namespace detail

/// Checks f(a1 + a2) = f(a1) f(a2) over the sample pairs. Residual per pair
/// is |f(a1+a2) - f(a1) f(a2)| / max(1, |f(a1+a2)|).
template <typename F>
ResidualReport<AdditivePair> check_additive_equation(F&& f,
                                                     std::span<const AdditivePair> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("check_additive_equation: empty sample list");
  }
  std::vector<double> residuals;
  residuals.reserve(samples.size());
  for (const auto& [a1, a2] : samples) {
    const Amplitude combined = f(a1 + a2);
    const Amplitude split = Amplitude(f(a1)) * Amplitude(f(a2));
    if (!is_finite(combined) || !is_finite(split)) {
      throw std::domain_error("check_additive_equation: non-finite function value");
    }
    residuals.push_back(std::abs(combined - split) / std::max(1.0, std::abs(combined)));
  }
  return detail::aggregate_residuals(samples, residuals);
}

/// Checks f(x1 * x2) = f(x1) f(x2) for a map on positive magnitudes.
template <typename F>
ResidualReport<MagnitudePair> check_multiplicative_equation(
    F&& f, std::span<const MagnitudePair> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("check_multiplicative_equation: empty sample list");
  }
  std::vector<double> residuals;
  residuals.reserve(samples.size());
  for (const auto& [x1, x2] : samples) {
    if (!(x1 > 0.0) || !(x2 > 0.0)) {
      throw std::invalid_argument("check_multiplicative_equation: samples must be > 0");
    }
    const double combined = f(x1 * x2);
    const double split = f(x1) * f(x2);
    if (!std::isfinite(combined) || !std::isfinite(split)) {
      throw std::domain_error("check_multiplicative_equation: non-finite function value");
    }
    residuals.push_back(std::abs(combined - split) / std::max(1.0, std::abs(combined)));
  }
  return detail::aggregate_residuals(samples, residuals);
}

struct ExponentFit {
  double p_hat = 0.0;
  double residual_rms = 0.0;
  std::pair<double, double> sample_range = {0.0, 0.0};
};

/// Least-squares slope of log f(x) against log x over (x, f(x)) samples.
/// The intercept is fitted too, so a scaled power law c * x^p still recovers p.
inline ExponentFit fit_power_exponent(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_power_exponent: needs at least 2 samples");
  }
  std::vector<double> lx, ly;
  lx.reserve(samples.size());
  ly.reserve(samples.size());
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = 0.0;
  for (const auto& [x, y] : samples) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("fit_power_exponent: samples must be finite and > 0");
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
  }
  const double n = static_cast<double>(samples.size());
  double mean_lx = 0.0, mean_ly = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mean_lx += lx[i];
    mean_ly += ly[i];
  }
  mean_lx /= n;
  mean_ly /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double dx = lx[i] - mean_lx;
    sxx += dx * dx;
    sxy += dx * (ly[i] - mean_ly);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit_power_exponent: all sample abscissae are identical");
  }
  ExponentFit fit;
  fit.p_hat = sxy / sxx;
  const double intercept = mean_ly - fit.p_hat * mean_lx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.p_hat * lx[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.sample_range = {min_x, max_x};
  return fit;
}

}  // namespace bornlab
