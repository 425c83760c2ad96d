#pragma once

/// Core value types: amplitudes, configurations, candidate weight functions,
/// unitaries, and p-norms. Everything here is immutable after construction
/// and all operations are pure.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bornlab {

using Amplitude = std::complex<double>;

inline bool is_finite(const Amplitude& a) {
  return std::isfinite(a.real()) && std::isfinite(a.imag());
}

inline double magnitude(const Amplitude& a) { return std::abs(a); }

/// Candidate outcome-weight map |alpha| -> |alpha|^p, parameterized by the
/// exponent p > 0. p = 2 is the value the consistency experiments single out.
struct WeightFunction {
  double p;

  explicit WeightFunction(double exponent) : p(exponent) {
    if (!(std::isfinite(exponent) && exponent > 0.0)) {
      throw std::invalid_argument("WeightFunction: exponent must be finite and > 0");
    }
  }
};

/// weight(alpha) = |alpha|^p. Depends only on the magnitude, so it is
/// phase invariant by construction.
inline double weight(const WeightFunction& wf, const Amplitude& a) {
  if (!is_finite(a)) {
    throw std::invalid_argument("weight: non-finite amplitude component");
  }
  if (wf.p == 2.0) return std::norm(a);
  return std::pow(std::abs(a), wf.p);
}

/// Vector of amplitudes over distinct outcome labels.
struct Configuration {
  Eigen::VectorXcd amplitudes;
  std::vector<std::string> labels;

  Configuration(Eigen::VectorXcd amps, std::vector<std::string> outcome_labels)
      : amplitudes(std::move(amps)), labels(std::move(outcome_labels)) {
    validate();
  }

  explicit Configuration(Eigen::VectorXcd amps)
      : amplitudes(std::move(amps)), labels(default_labels(amplitudes.size())) {
    validate();
  }

  Eigen::Index dim() const { return amplitudes.size(); }

  static std::vector<std::string> default_labels(Eigen::Index n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
  }

  /// Skips invariant checks. For internal construction where the invariants
  /// are already guaranteed (e.g. a unitary basis column with reused labels).
  static Configuration unchecked(Eigen::VectorXcd amps, std::vector<std::string> outcome_labels) {
    return Configuration(std::move(amps), std::move(outcome_labels), UncheckedTag{});
  }

 private:
  struct UncheckedTag {};
  Configuration(Eigen::VectorXcd amps, std::vector<std::string> outcome_labels, UncheckedTag)
      : amplitudes(std::move(amps)), labels(std::move(outcome_labels)) {}

  void validate() const {
    if (amplitudes.size() < 1) {
      throw std::invalid_argument("Configuration: needs at least one amplitude");
    }
    if (static_cast<Eigen::Index>(labels.size()) != amplitudes.size()) {
      throw std::invalid_argument("Configuration: label count must match amplitude count");
    }
    std::unordered_set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) {
      throw std::invalid_argument("Configuration: labels must be distinct");
    }
    bool any_nonzero = false;
    for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
      if (!is_finite(amplitudes[i])) {
        throw std::invalid_argument("Configuration: non-finite amplitude component");
      }
      if (amplitudes[i] != Amplitude{0.0, 0.0}) any_nonzero = true;
    }
    if (!any_nonzero) {
      throw std::invalid_argument("Configuration: all amplitudes are zero");
    }
  }
};

/// Square complex matrix with U^dagger U = I enforced at construction.
/// Tolerance is the max absolute entry deviation, default 1e-10.
class Unitary {
 public:
  explicit Unitary(Eigen::MatrixXcd entries, double tolerance = 1e-10)
      : entries_(std::move(entries)) {
    const Eigen::Index n = entries_.rows();
    if (n < 1 || entries_.cols() != n) {
      throw std::invalid_argument("Unitary: matrix must be square and non-empty");
    }
    if (!entries_.allFinite()) {
      throw std::invalid_argument("Unitary: non-finite entries");
    }
    const Eigen::MatrixXcd gram = entries_.adjoint() * entries_;
    const double dev =
        (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(dev <= tolerance)) {
      throw std::invalid_argument("Unitary: U^dagger U deviates from identity by " +
                                  std::to_string(dev));
    }
  }

  const Eigen::MatrixXcd& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  Eigen::MatrixXcd entries_;
};

inline Unitary identity_unitary(Eigen::Index n) {
  return Unitary(Eigen::MatrixXcd::Identity(n, n));
}

inline Unitary hadamard_unitary() {
  Eigen::MatrixXcd h(2, 2);
  const double s = 1.0 / std::numbers::sqrt2;
  h << s, s, s, -s;
  return Unitary(h);
}

/// Discrete Fourier matrix, F_{jk} = exp(-2*pi*i*j*k/n) / sqrt(n).
/// For n = 2 this is the Hadamard matrix.
inline Unitary fourier_unitary(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("fourier_unitary: n must be >= 1");
  Eigen::MatrixXcd f(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double phi = -2.0 * std::numbers::pi * static_cast<double>(j * k) /
                         static_cast<double>(n);
      f(j, k) = s * Amplitude{std::cos(phi), std::sin(phi)};
    }
  }
  return Unitary(f);
}

inline Unitary diagonal_phase_unitary(const std::vector<double>& phases) {
  const Eigen::Index n = static_cast<Eigen::Index>(phases.size());
  if (n < 1) throw std::invalid_argument("diagonal_phase_unitary: empty phase list");
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    d(k, k) = Amplitude{std::cos(phases[static_cast<std::size_t>(k)]),
                        std::sin(phases[static_cast<std::size_t>(k)])};
  }
  return Unitary(d);
}

/// Sum of |x_i|^p, the candidate conserved total.
inline double total_p_weight(const Eigen::VectorXcd& x, double p) {
  if (!(std::isfinite(p) && p > 0.0)) {
    throw std::invalid_argument("total_p_weight: p must be finite and > 0");
  }
  if (p == 2.0) return x.squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += std::pow(std::abs(x[i]), p);
  return total;
}

/// ||x||_p = (sum |x_i|^p)^(1/p), p > 0. A quasi-norm for p < 1; the
/// computations here never need the triangle inequality.
inline double p_norm(const Eigen::VectorXcd& x, double p) {
  if (p == 2.0) return x.norm();
  return std::pow(total_p_weight(x, p), 1.0 / p);
}

inline double total_weight(const WeightFunction& wf, const Configuration& c) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < c.dim(); ++i) total += weight(wf, c.amplitudes[i]);
  if (!(std::isfinite(total) && total > 0.0)) {
    throw std::domain_error("total_weight: total is not strictly positive");
  }
  return total;
}

inline Configuration apply_unitary(const Unitary& u, const Configuration& c) {
  if (u.dim() != c.dim()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  return Configuration::unchecked(u.matrix() * c.amplitudes, c.labels);
}

}  // namespace bornlab
