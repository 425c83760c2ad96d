#pragma once

/// Seeded randomness. A self-contained xoshiro256** engine (public-domain
/// reference algorithm by Blackman & Vigna) plus splitmix64 seeding keeps
/// every sampled quantity bit-reproducible across platforms, which the
/// standard <random> distributions do not guarantee. Substreams are derived
/// from (seed, stream) so per-trial generators are cheap to construct and
/// independent of worker assignment.

#include <cstdint>
#include <cmath>
#include <numbers>

#include "bornlab/amplitude.hpp"

namespace bornlab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t mix = stream + 0x9E3779B97F4A7C15ULL;
    mix = (mix ^ (mix >> 30)) * 0xBF58476D1CE4E5B9ULL;
    std::uint64_t sm = seed ^ mix;
    for (auto& word : s_) word = detail::splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
  }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

 private:
  std::uint64_t s_[4];
};

/// Uniform double in [0, 1), 53 bits of randomness.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Log-uniform on [lo, hi], lo > 0.
inline double log_uniform(Rng& rng, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) {
    throw std::invalid_argument("log_uniform: requires 0 < lo < hi");
  }
  return std::exp(uniform_range(rng, std::log(lo), std::log(hi)));
}

/// Complex number with independent N(0,1) real and imaginary parts
/// (Box-Muller; both halves of the pair are used).
inline Amplitude complex_gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1], keeps log finite
  const double u2 = uniform_unit(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return Amplitude{r * std::cos(phi), r * std::sin(phi)};
}

inline double gaussian(Rng& rng) { return complex_gaussian(rng).real(); }

inline Eigen::VectorXcd gaussian_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = complex_gaussian(rng);
  return v;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// R-diagonal phases folded back into Q (Mezzadri's construction).
inline Unitary haar_unitary(Eigen::Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("haar_unitary: n must be >= 1");
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = complex_gaussian(rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::VectorXcd r_diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r_diag[j]);
    const Amplitude phase = mag > 0.0 ? r_diag[j] / mag : Amplitude{1.0, 0.0};
    q.col(j) *= phase;
  }
  return Unitary(std::move(q));
}

/// Random configuration with unit 2-norm and default labels.
inline Configuration random_configuration(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v = gaussian_vector(n, rng);
  double nrm = v.norm();
  while (!(nrm > 1e-12)) {  // essentially unreachable
    v = gaussian_vector(n, rng);
    nrm = v.norm();
  }
  return Configuration(v / nrm);
}

}  // namespace bornlab
