#pragma once

/// Dense matrix exponential by scaling and squaring with diagonal Pade
/// approximants (Higham 2005 degree/theta selection). Accurate to better
/// than 1e-12 relative for the small matrices and ||A||_1 <= 50 range used
/// here.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>

namespace bornlab {

inline double one_norm(const Eigen::MatrixXcd& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

namespace detail {

// Pade numerator coefficients b_0..b_m for the diagonal [m/m] approximant.
inline constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
inline constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0,
                                                 277200.0,   25200.0,   1512.0,
                                                 56.0,       1.0};
inline constexpr std::array<double, 10> kPade9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

template <std::size_t N>
void pade_uv(const Eigen::MatrixXcd& a, const std::array<double, N>& b,
             Eigen::MatrixXcd& u, Eigen::MatrixXcd& v) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd a2 = a * a;
  Eigen::MatrixXcd even = b[0] * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd odd = b[1] * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    even += b[k] * power;
    if (k + 1 < N) odd += b[k + 1] * power;
  }
  u = a * odd;
  v = even;
}

inline void pade13_uv(const Eigen::MatrixXcd& a, Eigen::MatrixXcd& u,
                      Eigen::MatrixXcd& v) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd a2 = a * a;
  const Eigen::MatrixXcd a4 = a2 * a2;
  const Eigen::MatrixXcd a6 = a4 * a2;
  u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
           b[3] * a2 + b[1] * id);
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
      b[2] * a2 + b[0] * id;
}

}  // namespace detail

inline Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a_in) {
  if (a_in.rows() != a_in.cols() || a_in.rows() < 1) {
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  }
  if (!a_in.allFinite()) {
    throw std::invalid_argument("matrix_exponential: non-finite entries");
  }

  constexpr double kTheta3 = 1.495585217958292e-2;
  constexpr double kTheta5 = 2.539398330063230e-1;
  constexpr double kTheta7 = 9.504178996162932e-1;
  constexpr double kTheta9 = 2.097847961257068e0;
  constexpr double kTheta13 = 5.371920351148152e0;

  const double nrm = one_norm(a_in);
  Eigen::MatrixXcd u, v;
  int squarings = 0;

  if (nrm <= kTheta3) {
    detail::pade_uv(a_in, detail::kPade3, u, v);
  } else if (nrm <= kTheta5) {
    detail::pade_uv(a_in, detail::kPade5, u, v);
  } else if (nrm <= kTheta7) {
    detail::pade_uv(a_in, detail::kPade7, u, v);
  } else if (nrm <= kTheta9) {
    detail::pade_uv(a_in, detail::kPade9, u, v);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    const Eigen::MatrixXcd scaled = a_in / std::pow(2.0, squarings);
    detail::pade13_uv(scaled, u, v);
  }

  // [m/m] Pade: exp(A) ~ (V - U)^{-1} (V + U)
  Eigen::MatrixXcd result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = result * result;
  if (!result.allFinite()) {
    throw std::domain_error("matrix_exponential: result is not finite");
  }
  return result;
}

}  // namespace bornlab
