#pragma once

// Test-only reference implementations, deliberately independent of the
// library's computational paths. The Taylor exponential and the quadrature
// below never touch matrix_exp.hpp; the brute-force proxy sum uses explicit
// matrix powers instead of the library's recursion.

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "gainbound/dynamics.hpp"

namespace testsupport {

/// Scaled Taylor-series exponential: halve until the norm is small, sum the
/// series to machine tail, square back up.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 60; ++k) {
    term = (term * scaled / static_cast<double>(k)).eval();
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

/// Composite-Simpson quadrature of integral_0^dt exp(a s) ds * b, with the
/// integrand evaluated through the Taylor exponential.
inline Eigen::MatrixXd zoh_input_quadrature(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b,
                                            double dt, int intervals = 1024) {
  const double h = dt / intervals;
  Eigen::MatrixXd acc = expm_taylor(a * 0.0) + expm_taylor(a * dt);
  for (int i = 1; i < intervals; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * expm_taylor(a * (i * h));
  }
  return (acc * (h / 3.0)) * b;
}

/// Explicit-power evaluation of sum_{s<t} A^s B Sigma B^T (A^T)^s.
inline Eigen::MatrixXd brute_force_proxy(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& sigma,
                                         long t) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (long s = 0; s < t; ++s) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (long k = 0; k < s; ++k) power = (power * a).eval();
    sum += power * b * sigma * b.transpose() * power.transpose();
  }
  return sum;
}

/// Deterministic uniform in [lo, hi) from raw mt19937_64 bits (portable
/// across standard libraries, unlike std::uniform_real_distribution).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                     Eigen::Index cols, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
  }
  return m;
}

/// Random Schur-stable loop with position-selector output, dimensions
/// (2n, n).
inline gainbound::DiscreteClosedLoop random_stable_loop(std::mt19937_64& rng,
                                                        Eigen::Index n,
                                                        double target_rho) {
  gainbound::DiscreteClosedLoop loop;
  Eigen::MatrixXd a = random_matrix(rng, 2 * n, 2 * n);
  a *= target_rho / gainbound::spectral_radius(a);
  loop.a = a;
  loop.b = random_matrix(rng, 2 * n, n);
  loop.c = Eigen::MatrixXd::Zero(n, 2 * n);
  loop.c.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
  loop.spectral_radius = gainbound::spectral_radius(a);
  loop.dt = 0.02;
  return loop;
}

/// Random Hurwitz matrix: shift a random matrix left of the imaginary axis.
inline Eigen::MatrixXd random_hurwitz(std::mt19937_64& rng, Eigen::Index n,
                                      double margin = 0.5) {
  Eigen::MatrixXd a = random_matrix(rng, n, n);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  const double shift = es.eigenvalues().real().maxCoeff() + margin;
  return a - shift * Eigen::MatrixXd::Identity(n, n);
}

/// Random symmetric PSD matrix Q = R R^T / n + ridge I.
inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n,
                                  double ridge = 0.1) {
  const Eigen::MatrixXd r = random_matrix(rng, n, n);
  return r * r.transpose() / static_cast<double>(n) +
         ridge * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace testsupport
