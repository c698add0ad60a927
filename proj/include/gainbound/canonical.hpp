#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gainbound/bounds.hpp"
#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"

namespace gainbound {

/// The four canonical gain regimes: corners of a two-level stiffness/damping
/// grid.
enum class Regime { kCO, kSO, kCU, kSU };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kCO: return "CO";
    case Regime::kSO: return "SO";
    case Regime::kCU: return "CU";
    case Regime::kSU: return "SU";
  }
  return "?";
}

inline constexpr std::array<Regime, 4> kAllRegimes = {
    Regime::kCO, Regime::kSO, Regime::kCU, Regime::kSU};

/// Two stiffness levels and two damping levels spanning the canonical quad:
/// CO = (alpha_l, beta_h), SO = (alpha_h, beta_h), CU = (alpha_l, beta_l),
/// SU = (alpha_h, beta_l).
struct RegimeQuad {
  double alpha_l, alpha_h;
  double beta_l, beta_h;

  RegimeQuad(double al, double ah, double bl, double bh)
      : alpha_l(al), alpha_h(ah), beta_l(bl), beta_h(bh) {
    if (!(0.0 < alpha_l && alpha_l < alpha_h)) {
      throw ConfigError("RegimeQuad: need 0 < alpha_l < alpha_h");
    }
    if (!(0.0 < beta_l && beta_l < beta_h)) {
      throw ConfigError("RegimeQuad: need 0 < beta_l < beta_h");
    }
  }

  double alpha(Regime r) const {
    return (r == Regime::kCO || r == Regime::kCU) ? alpha_l : alpha_h;
  }
  double beta(Regime r) const {
    return (r == Regime::kCO || r == Regime::kSO) ? beta_h : beta_l;
  }
  GainSetting gains(Regime r) const { return {alpha(r), beta(r)}; }

  GainSetting co() const { return gains(Regime::kCO); }
  GainSetting so() const { return gains(Regime::kSO); }
  GainSetting cu() const { return gains(Regime::kCU); }
  GainSetting su() const { return gains(Regime::kSU); }
};

/// Scalar certificate (label difficulty l, injection b, contraction
/// rho_star) plus the position reference x_bar = C w_bar C^T that together
/// upper-bound the stationary proxy through the ordering index.
struct ShapeStructure {
  double l = 0.0;
  double b = 0.0;
  double rho_star = 0.0;
  Eigen::MatrixXd x_bar;

  void validate() const {
    if (!(l >= 0.0) || !(b >= 0.0)) {
      throw ConfigError("ShapeStructure: l and b must be non-negative");
    }
    if (!(rho_star >= 0.0) || !(rho_star < 1.0)) {
      throw ConfigError("ShapeStructure: rho_star must be in [0, 1)");
    }
  }
};

/// Stationary covariance of the scalar canonical loop driven by white action
/// error of intensity sigma2: diag(sigma2 a / (2b), sigma2 a^2 / (2 b m)).
inline Eigen::Matrix2d continuous_stationary_covariance(double alpha,
                                                        double beta, double m,
                                                        double sigma2) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(m > 0.0) || !(sigma2 >= 0.0)) {
    throw ConfigError(
        "continuous_stationary_covariance: alpha, beta, m must be positive");
  }
  Eigen::Matrix2d p = Eigen::Matrix2d::Zero();
  p(0, 0) = sigma2 * alpha / (2.0 * beta);
  p(1, 1) = sigma2 * alpha * alpha / (2.0 * beta * m);
  return p;
}

/// Position entry of the stationary covariance: sigma2 alpha / (2 beta).
/// Strictly increasing in alpha and strictly decreasing in beta over the
/// whole stable orthant.
inline double continuous_position_variance(double alpha, double beta,
                                           double sigma2) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError(
        "continuous_position_variance: alpha, beta must be positive");
  }
  return sigma2 * alpha / (2.0 * beta);
}

/// Squared H2 norm of the disturbance-to-position transfer function,
/// alpha / (2 beta); identical to the unit-noise stationary position
/// variance.
inline double h2_norm_squared(double alpha, double beta) {
  return continuous_position_variance(alpha, beta, 1.0);
}

/// Leading-order canonical failure bound
///   min(1, 2(T+1) exp(-r^2 beta / (alpha dt l_roll))).
/// The o(dt) discretization remainder is not computable and is omitted; the
/// raw exponent is reported so clipping stays visible.
inline FailureBound canonical_failure_bound(double alpha, double beta,
                                            double dt, double r,
                                            long t_horizon, double l_roll) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(dt > 0.0) || !(r > 0.0) ||
      t_horizon < 0 || !(l_roll > 0.0)) {
    throw ConfigError("canonical_failure_bound: all inputs must be positive");
  }
  FailureBound out;
  out.exponent = -r * r * beta / (alpha * dt * l_roll);
  out.raw = 2.0 * static_cast<double>(t_horizon + 1) * std::exp(out.exponent);
  out.bound = std::min(1.0, out.raw);
  return out;
}

/// Ordering index Psi = b l / (1 - rho_star^2).
inline double ordering_index(const ShapeStructure& structure) {
  structure.validate();
  return structure.b * structure.l /
         (1.0 - structure.rho_star * structure.rho_star);
}

/// Empirical check of the regime ordering for a given scalar index function:
/// Psi(CO) <= min(Psi(SO), Psi(CU)) and Psi(SU) >= max(Psi(SO), Psi(CU)).
/// Violated Hasse edges are reported by name rather than thrown; the SO/CU
/// comparison is system-dependent and reported as a signed difference with a
/// 1e-12 tie band.
struct OrderingReport {
  double psi_co = 0.0, psi_so = 0.0, psi_cu = 0.0, psi_su = 0.0;
  bool co_is_minimum = false;
  bool su_is_maximum = false;
  double so_minus_cu = 0.0;
  bool so_cu_tie = false;
  std::vector<std::string> violated_edges;

  double psi(Regime r) const {
    switch (r) {
      case Regime::kCO: return psi_co;
      case Regime::kSO: return psi_so;
      case Regime::kCU: return psi_cu;
      case Regime::kSU: return psi_su;
    }
    return 0.0;
  }
};

inline OrderingReport regime_ordering(
    const RegimeQuad& quad,
    const std::function<double(double alpha, double beta)>& psi_fn) {
  OrderingReport report;
  report.psi_co = psi_fn(quad.alpha_l, quad.beta_h);
  report.psi_so = psi_fn(quad.alpha_h, quad.beta_h);
  report.psi_cu = psi_fn(quad.alpha_l, quad.beta_l);
  report.psi_su = psi_fn(quad.alpha_h, quad.beta_l);

  if (report.psi_co > report.psi_so) report.violated_edges.push_back("CO<=SO");
  if (report.psi_co > report.psi_cu) report.violated_edges.push_back("CO<=CU");
  if (report.psi_su < report.psi_so) report.violated_edges.push_back("SO<=SU");
  if (report.psi_su < report.psi_cu) report.violated_edges.push_back("CU<=SU");

  report.co_is_minimum = report.psi_co <= std::min(report.psi_so,
                                                   report.psi_cu);
  report.su_is_maximum = report.psi_su >= std::max(report.psi_so,
                                                   report.psi_cu);
  report.so_minus_cu = report.psi_so - report.psi_cu;
  report.so_cu_tie = std::abs(report.so_minus_cu) <= 1e-12;
  return report;
}

/// Shape-preserving certificate for a joint-decoupled plant (diagonal M,
/// per-joint gains) with reference w_bar = I_2n, sigma_bar = I_n:
///   l = lambda_max(sigma_roll),
///   b = max_i alpha_i^2 dt^2 / (4 m_i^2),
///   rho_star = max_i exp(-beta_i dt / (2 m_i)),
///   x_bar = I_n.
inline ShapeStructure multijoint_structure(const PlantModel& plant,
                                           const GainSetting& gains,
                                           const Eigen::MatrixXd& sigma_roll) {
  const Eigen::Index n = plant.joints();
  if (gains.joints() != n || sigma_roll.rows() != n ||
      sigma_roll.cols() != n) {
    throw ConfigError("multijoint_structure: dimension mismatch");
  }
  const Eigen::MatrixXd off_diag =
      plant.mass - Eigen::MatrixXd(plant.mass.diagonal().asDiagonal());
  if (off_diag.cwiseAbs().maxCoeff() >
      1e-12 * plant.mass.cwiseAbs().maxCoeff()) {
    throw ConfigError(
        "multijoint_structure: the reduction requires a diagonal mass "
        "matrix (joints must decouple)");
  }

  ShapeStructure structure;
  structure.l = detail::max_eigenvalue_psd(sigma_roll);
  structure.b = 0.0;
  structure.rho_star = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m_i = plant.mass(i, i);
    const double inj = gains.kp(i) * gains.kp(i) * plant.dt * plant.dt /
                       (4.0 * m_i * m_i);
    structure.b = std::max(structure.b, inj);
    structure.rho_star =
        std::max(structure.rho_star,
                 std::exp(-gains.kd(i) * plant.dt / (2.0 * m_i)));
  }
  structure.x_bar = Eigen::MatrixXd::Identity(n, n);
  structure.validate();
  return structure;
}

}  // namespace gainbound
