#pragma once

/// Numerical determination of the continuous linear isometry group of the
/// p-norm on C^n, through its Lie algebra. A matrix A generates a p-norm
/// isometry flow exp(tA) iff the first-order condition
///
///     sum_i |x_i|^{p-2} Re(conj(x_i) (Ax)_i) = 0
///
/// holds for all x. Each sampled vector x contributes one real-linear
/// constraint row on the 2n^2 real parameters of A; the generator space is
/// the null space of the stacked rows. Its dimension is n^2 exactly at
/// p = 2 (anti-Hermitian matrices) and collapses to n otherwise (independent
/// phase rotations only), which is the rigidity statistic this module
/// measures.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bornlab/amplitude.hpp"
#include "bornlab/expm.hpp"
#include "bornlab/random.hpp"

namespace bornlab {

/// Raised when the singular-value spectrum has no clean gap around the rank
/// threshold, i.e. the dimension estimate would be a guess. Distinct from
/// validation errors so callers can map it to a dedicated exit status.
class AmbiguousRankError : public std::runtime_error {
 public:
  explicit AmbiguousRankError(const std::string& what) : std::runtime_error(what) {}
};

struct GeneratorConstraintSystem {
  int n = 0;
  double p = 0.0;
  Eigen::MatrixXd constraint_matrix;  // m x 2n^2, rows unit-normalized
  double sample_floor = 0.0;
};

struct IsometryScanResult {
  int n = 0;
  double p = 0.0;
  int estimated_dimension = 0;
  std::vector<double> singular_values;  // descending
  double rank_gap = 0.0;
};

/// Real-parameter layout of a complex n x n matrix: Re(A_ij) first block,
/// Im(A_ij) second block, row-major within each.
inline Eigen::Index param_re_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  return i * n + j;
}
inline Eigen::Index param_im_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  return n * n + i * n + j;
}

inline Eigen::VectorXd pack_generator(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd params(2 * n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      params[param_re_index(i, j, n)] = a(i, j).real();
      params[param_im_index(i, j, n)] = a(i, j).imag();
    }
  }
  return params;
}

inline Eigen::MatrixXcd unpack_generator(const Eigen::VectorXd& params, Eigen::Index n) {
  if (params.size() != 2 * n * n) {
    throw std::invalid_argument("unpack_generator: parameter vector has wrong size");
  }
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = Amplitude{params[param_re_index(i, j, n)],
                          params[param_im_index(i, j, n)]};
    }
  }
  return a;
}

/// The first-order functional L_x(A) = sum_i |x_i|^{p-2} Re(conj(x_i)(Ax)_i).
/// Equals N^{1 - 1/p} * d/dt ||exp(tA) x||_p at t = 0, with N = sum |x_i|^p.
inline double norm_derivative(const Eigen::VectorXcd& x, double p,
                              const Eigen::MatrixXcd& a) {
  const Eigen::VectorXcd ax = a * x;
  double value = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]);
    value += std::pow(mag, p - 2.0) * (std::conj(x[i]) * ax[i]).real();
  }
  return value;
}

/// Coefficients of L_x as a linear functional on the packed parameters,
/// unnormalized: constraint_row(x, p) . pack_generator(A) == L_x(A).
inline Eigen::RowVectorXd constraint_row(const Eigen::VectorXcd& x, double p) {
  const Eigen::Index n = x.size();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = std::pow(std::abs(x[i]), p - 2.0);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Amplitude c = std::conj(x[i]) * x[k];
      row[param_re_index(i, k, n)] = w * c.real();
      row[param_im_index(i, k, n)] = -w * c.imag();
    }
  }
  return row;
}

/// Builds the sampled constraint system. Sample vectors are complex Gaussian,
/// rejection-resampled so every component magnitude stays >= sample_floor;
/// the weight |x_i|^{p-2} is singular at x_i = 0 for p < 2 and the floor
/// keeps rows finite and well-conditioned. Rows are normalized to unit
/// Euclidean length.
inline GeneratorConstraintSystem build_constraint_system(int n, double p,
                                                         Eigen::Index num_samples,
                                                         Rng& rng,
                                                         double sample_floor = 1e-3) {
  if (n < 2) throw std::invalid_argument("build_constraint_system: n must be >= 2");
  if (!(std::isfinite(p) && p > 0.0)) {
    throw std::invalid_argument("build_constraint_system: p must be finite and > 0");
  }
  const Eigen::Index num_params = 2 * static_cast<Eigen::Index>(n) * n;
  if (num_samples < 10 * num_params) {
    throw std::invalid_argument(
        "build_constraint_system: need at least 10 * 2n^2 samples");
  }
  if (!(sample_floor > 0.0)) {
    throw std::invalid_argument("build_constraint_system: sample_floor must be > 0");
  }

  GeneratorConstraintSystem sys;
  sys.n = n;
  sys.p = p;
  sys.sample_floor = sample_floor;
  sys.constraint_matrix.resize(num_samples, num_params);

  const Eigen::Index max_attempts = 100 * num_samples;
  Eigen::Index attempts = 0;
  for (Eigen::Index row_idx = 0; row_idx < num_samples;) {
    if (attempts >= max_attempts) {
      throw std::runtime_error(
          "build_constraint_system: rejection sampling exhausted attempts; "
          "sample_floor is too high");
    }
    ++attempts;
    const Eigen::VectorXcd x = gaussian_vector(n, rng);
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(x[i]) < sample_floor) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    Eigen::RowVectorXd row = constraint_row(x, p);
    const double nrm = row.norm();
    if (!(nrm > 0.0) || !row.allFinite()) continue;
    sys.constraint_matrix.row(row_idx) = row / nrm;
    ++row_idx;
  }
  return sys;
}

/// Max |row . pack(A)| over the rows of the system; zero exactly when A
/// satisfies every sampled first-order constraint.
inline double max_row_residual(const GeneratorConstraintSystem& sys,
                               const Eigen::MatrixXcd& a) {
  if (a.rows() != sys.n || a.cols() != sys.n) {
    throw std::invalid_argument("max_row_residual: generator dimension mismatch");
  }
  return (sys.constraint_matrix * pack_generator(a)).cwiseAbs().maxCoeff();
}

namespace detail {

struct RankDecision {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd v;  // right singular vectors
  Eigen::Index rank = 0;
  double gap = 0.0;
};

inline RankDecision resolve_rank(const GeneratorConstraintSystem& sys,
                                 double rank_tolerance, double min_rank_gap) {
  if (sys.constraint_matrix.size() == 0) {
    throw std::invalid_argument("resolve_rank: empty constraint system");
  }
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0)) {
    throw std::invalid_argument("resolve_rank: rank_tolerance must be in (0, 1)");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.constraint_matrix,
                                        Eigen::ComputeThinV);
  RankDecision decision;
  decision.singular_values = svd.singularValues();
  decision.v = svd.matrixV();
  const double sigma_max = decision.singular_values[0];
  if (!(sigma_max > 0.0)) {
    throw AmbiguousRankError("rank estimate: constraint matrix is zero");
  }
  const double threshold = rank_tolerance * sigma_max;
  Eigen::Index rank = 0;
  while (rank < decision.singular_values.size() &&
         decision.singular_values[rank] > threshold) {
    ++rank;
  }
  if (rank == decision.singular_values.size()) {
    throw AmbiguousRankError(
        "rank estimate: no singular value falls below the threshold, null "
        "space cannot be certified");
  }
  const double smallest_kept = decision.singular_values[rank - 1];
  const double largest_dropped = decision.singular_values[rank];
  decision.gap = largest_dropped > 0.0
                     ? smallest_kept / largest_dropped
                     : std::numeric_limits<double>::infinity();
  if (!(decision.gap >= min_rank_gap)) {
    throw AmbiguousRankError(
        "rank estimate: spectral gap " + std::to_string(decision.gap) +
        " below required factor " + std::to_string(min_rank_gap));
  }
  decision.rank = rank;
  return decision;
}

}  // namespace detail

/// Singular-value spectrum of the constraint matrix; estimated_dimension is
/// 2n^2 minus the numerical rank. Throws AmbiguousRankError when the
/// spectrum has no >= min_rank_gap gap at the threshold.
inline IsometryScanResult estimate_generator_dimension(
    const GeneratorConstraintSystem& sys, double rank_tolerance = 1e-8,
    double min_rank_gap = 10.0) {
  const auto decision = detail::resolve_rank(sys, rank_tolerance, min_rank_gap);
  IsometryScanResult result;
  result.n = sys.n;
  result.p = sys.p;
  result.estimated_dimension =
      static_cast<int>(2 * sys.n * sys.n - decision.rank);
  result.singular_values.assign(
      decision.singular_values.data(),
      decision.singular_values.data() + decision.singular_values.size());
  result.rank_gap = decision.gap;
  return result;
}

/// Orthonormal basis of the numerical null space, unpacked to complex
/// generator matrices.
inline std::vector<Eigen::MatrixXcd> null_space_generators(
    const GeneratorConstraintSystem& sys, double rank_tolerance = 1e-8,
    double min_rank_gap = 10.0) {
  const auto decision = detail::resolve_rank(sys, rank_tolerance, min_rank_gap);
  std::vector<Eigen::MatrixXcd> basis;
  for (Eigen::Index col = decision.rank; col < decision.v.cols(); ++col) {
    basis.push_back(unpack_generator(decision.v.col(col), sys.n));
  }
  return basis;
}

/// Finite-time confirmation of a candidate generator: max over the (t, x)
/// grid of | ||exp(tA) x||_p - ||x||_p | / ||x||_p.
inline double verify_generator_finite_time(const Eigen::MatrixXcd& a, double p,
                                           std::span<const double> t_grid,
                                           std::span<const Eigen::VectorXcd> x_samples) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("verify_generator_finite_time: A must be square");
  }
  if (t_grid.empty() || x_samples.empty()) {
    throw std::invalid_argument("verify_generator_finite_time: empty t grid or sample set");
  }
  const double a_norm = one_norm(a);
  double max_deviation = 0.0;
  for (double t : t_grid) {
    if (std::abs(t) * a_norm > 50.0) {
      throw std::invalid_argument("verify_generator_finite_time: ||tA|| exceeds 50");
    }
    const Eigen::MatrixXcd flow = matrix_exponential(t * a);
    for (const Eigen::VectorXcd& x : x_samples) {
      if (x.size() != a.rows()) {
        throw std::invalid_argument("verify_generator_finite_time: sample dimension mismatch");
      }
      const double base = p_norm(x, p);
      if (!(base > 0.0)) {
        throw std::invalid_argument("verify_generator_finite_time: zero sample vector");
      }
      const double moved = p_norm(flow * x, p);
      max_deviation = std::max(max_deviation, std::abs(moved - base) / base);
    }
  }
  return max_deviation;
}

/// The residual discrete isometries: entries e^{i phi_k} at (perm(k), k).
/// Preserves every p-norm exactly, for every p > 0.
inline Unitary permutation_phase_isometry(const std::vector<int>& perm,
                                          const std::vector<double>& phases) {
  const Eigen::Index n = static_cast<Eigen::Index>(perm.size());
  if (n < 1) throw std::invalid_argument("permutation_phase_isometry: empty permutation");
  if (phases.size() != perm.size()) {
    throw std::invalid_argument("permutation_phase_isometry: phase count mismatch");
  }
  std::vector<bool> seen(perm.size(), false);
  for (int target : perm) {
    if (target < 0 || target >= n || seen[static_cast<std::size_t>(target)]) {
      throw std::invalid_argument("permutation_phase_isometry: perm is not a bijection");
    }
    seen[static_cast<std::size_t>(target)] = true;
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double phi = phases[static_cast<std::size_t>(k)];
    m(perm[static_cast<std::size_t>(k)], k) = Amplitude{std::cos(phi), std::sin(phi)};
  }
  return Unitary(std::move(m), 1e-12);
}

}  // namespace bornlab
