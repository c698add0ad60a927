#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "gainbound/errors.hpp"

namespace gainbound {

namespace detail {

// Pade numerator/denominator pairs for exp(A) around 0. After each helper,
// (V - U)^{-1} (V + U) is the [m/m] diagonal Pade approximant of exp(A).
inline void exp_pade3(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a2,
                      Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  u = a * (a2 + 60.0 * id);
  v = 12.0 * a2 + 120.0 * id;
}

inline void exp_pade5(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a2,
                      const Eigen::MatrixXd& a4, Eigen::MatrixXd& u,
                      Eigen::MatrixXd& v) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  u = a * (a4 + 420.0 * a2 + 15120.0 * id);
  v = 30.0 * a4 + 3360.0 * a2 + 30240.0 * id;
}

inline void exp_pade7(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a2,
                      const Eigen::MatrixXd& a4, const Eigen::MatrixXd& a6,
                      Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  u = a * (a6 + 1512.0 * a4 + 277200.0 * a2 + 8648640.0 * id);
  v = 56.0 * a6 + 25200.0 * a4 + 1995840.0 * a2 + 17297280.0 * id;
}

inline void exp_pade9(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a2,
                      const Eigen::MatrixXd& a4, const Eigen::MatrixXd& a6,
                      const Eigen::MatrixXd& a8, Eigen::MatrixXd& u,
                      Eigen::MatrixXd& v) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  u = a * (a8 + 3960.0 * a6 + 2162160.0 * a4 + 302702400.0 * a2 +
           8821612800.0 * id);
  v = 90.0 * a8 + 110880.0 * a6 + 30270240.0 * a4 + 2075673600.0 * a2 +
      17643225600.0 * id;
}

inline void exp_pade13(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a2,
                       const Eigen::MatrixXd& a4, const Eigen::MatrixXd& a6,
                       Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
           b[5] * a4 + b[3] * a2 + b[1] * id);
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
      b[2] * a2 + b[0] * id;
}

}  // namespace detail

/// Dense matrix exponential by scaling and squaring with diagonal Pade
/// approximants, order selected from the 1-norm (Higham 2005). Exact to
/// roundoff for the small, well-scaled matrices this library produces.
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw ConfigError("matrix_exponential: matrix must be square");
  }
  // 1-norm switching thresholds for the [3/3] ... [13/13] approximants.
  constexpr double theta3 = 1.495585217958292e-2;
  constexpr double theta5 = 2.539398330063230e-1;
  constexpr double theta7 = 9.504178996162932e-1;
  constexpr double theta9 = 2.097847961257068e0;
  constexpr double theta13 = 5.371920351148152e0;

  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  Eigen::MatrixXd u, v;
  int squarings = 0;

  if (norm <= theta9) {
    const Eigen::MatrixXd a2 = a * a;
    if (norm <= theta3) {
      detail::exp_pade3(a, a2, u, v);
    } else if (norm <= theta5) {
      const Eigen::MatrixXd a4 = a2 * a2;
      detail::exp_pade5(a, a2, a4, u, v);
    } else if (norm <= theta7) {
      const Eigen::MatrixXd a4 = a2 * a2;
      const Eigen::MatrixXd a6 = a4 * a2;
      detail::exp_pade7(a, a2, a4, a6, u, v);
    } else {
      const Eigen::MatrixXd a4 = a2 * a2;
      const Eigen::MatrixXd a6 = a4 * a2;
      const Eigen::MatrixXd a8 = a6 * a2;
      detail::exp_pade9(a, a2, a4, a6, a8, u, v);
    }
  } else {
    if (norm > theta13) {
      squarings = std::max(0, static_cast<int>(
                                  std::ceil(std::log2(norm / theta13))));
    }
    const Eigen::MatrixXd scaled = a * std::ldexp(1.0, -squarings);
    const Eigen::MatrixXd a2 = scaled * scaled;
    const Eigen::MatrixXd a4 = a2 * a2;
    const Eigen::MatrixXd a6 = a4 * a2;
    detail::exp_pade13(scaled, a2, a4, a6, u, v);
  }

  Eigen::MatrixXd result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    result = result * result;
  }
  return result;
}

}  // namespace gainbound
