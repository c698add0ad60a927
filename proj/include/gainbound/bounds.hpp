#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"

namespace gainbound {

/// Inputs of the horizon-T failure bound: tube radius r, horizon T, empirical
/// validation loss, generalization slack and joint count. The confidence
/// parameter delta enters only through eps_gen, which is consumed as an
/// opaque scalar.
struct FailureBoundQuery {
  double r = 0.0;
  long t_horizon = 0;
  double l_va = 0.0;
  double eps_gen = 0.0;
  long n = 1;

  void validate() const {
    if (!(r > 0.0)) throw ConfigError("FailureBoundQuery: r must be > 0");
    if (t_horizon < 0) throw ConfigError("FailureBoundQuery: T must be >= 0");
    if (!(l_va >= 0.0) || !(eps_gen >= 0.0) || !std::isfinite(l_va) ||
        !std::isfinite(eps_gen)) {
      throw ConfigError(
          "FailureBoundQuery: loss terms must be finite and non-negative");
    }
    if (n < 1) throw ConfigError("FailureBoundQuery: n must be >= 1");
  }
};

/// Finite-horizon amplification index Gamma_T together with the per-step
/// squared operator-norm gains |C A^s B|^2 and the t attaining the outer max
/// (always T, since the summands are non-negative; recorded for
/// transparency).
struct AmplificationResult {
  double gamma = 0.0;
  std::vector<double> per_step_gains;  // s = 0 .. T-1
  long argmax_t = 0;
};

/// Geometric-series bound on Gamma_T plus a diagnostic: the per-step
/// inequality |C A^s B| <= |B| rho^s it rests on can fail for non-normal A,
/// in which case dominance over Gamma_T is not guaranteed and the flag is
/// cleared.
struct GeometricBound {
  double bound = 0.0;
  bool per_step_dominated = true;
};

/// A clipped tail/failure probability together with its unclipped value and
/// the raw exponent, so callers can see when the min{1, .} clip is active.
struct FailureBound {
  double bound = 0.0;     // min(1, raw)
  double raw = 0.0;       // prefactor * exp(exponent)
  double exponent = 0.0;  // the (negative) argument of the exponential
};

namespace detail {

inline double operator_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

inline double max_eigenvalue_psd(const Eigen::MatrixXd& x) {
  if (x.rows() == 1 && x.cols() == 1) return x(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      ((x + x.transpose()) / 2.0).eval());
  if (es.info() != Eigen::Success) {
    throw SolverError("max_eigenvalue: eigen decomposition failed");
  }
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

/// Gamma_T = max_{0<=t<=T} sum_{s<t} |C A^s B|_op^2. The powers A^s B are
/// accumulated by repeated multiplication; operator norms come from a full
/// SVD of the small n x n products.
inline AmplificationResult amplification_index(const DiscreteClosedLoop& loop,
                                               long t_horizon) {
  if (t_horizon < 0) {
    throw ConfigError("amplification_index: horizon must be >= 0");
  }
  AmplificationResult result;
  result.per_step_gains.reserve(static_cast<size_t>(t_horizon));

  Eigen::MatrixXd power_b = loop.b;  // A^s B
  double prefix = 0.0;
  for (long s = 0; s < t_horizon; ++s) {
    const double gain = detail::operator_norm(loop.c * power_b);
    result.per_step_gains.push_back(gain * gain);
    prefix += gain * gain;
    if (s + 1 < t_horizon) power_b = loop.a * power_b;
  }
  result.gamma = prefix;
  result.argmax_t = t_horizon;
  return result;
}

/// Geometric bound |B|^2 / (1 - rho^2) * (1 - rho^(2T)) on Gamma_T. Valid as
/// a dominating bound only while |C A^s B| <= |B| rho^s holds per step; the
/// returned flag reports whether that held over s < T.
inline GeometricBound amplification_geometric_bound(
    const DiscreteClosedLoop& loop, long t_horizon) {
  if (t_horizon < 0) {
    throw ConfigError("amplification_geometric_bound: horizon must be >= 0");
  }
  const double rho = loop.spectral_radius;
  const double b_norm = detail::operator_norm(loop.b);

  GeometricBound result;
  result.bound = b_norm * b_norm / (1.0 - rho * rho) *
                 (1.0 - std::pow(rho, 2.0 * static_cast<double>(t_horizon)));

  Eigen::MatrixXd power_b = loop.b;
  double rho_pow = 1.0;
  for (long s = 0; s < t_horizon; ++s) {
    if (detail::operator_norm(loop.c * power_b) >
        b_norm * rho_pow * (1.0 + 1e-12)) {
      result.per_step_dominated = false;
      break;
    }
    rho_pow *= rho;
    if (s + 1 < t_horizon) power_b = loop.a * power_b;
  }
  return result;
}

/// Sub-Gaussian tail along direction u: min(1, 2 exp(-r^2 / (2 u^T x u))).
/// A degenerate direction (u^T x u = 0) carries no noise, so the tail is 0
/// for any r > 0.
inline double directional_tail(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& u, double r) {
  if (!(r > 0.0)) throw ConfigError("directional_tail: r must be > 0");
  if (x.rows() != u.size()) {
    throw ConfigError("directional_tail: dimension mismatch");
  }
  const double variance = u.dot(x * u);
  if (variance <= 0.0) return 0.0;
  return std::min(1.0, 2.0 * std::exp(-r * r / (2.0 * variance)));
}

/// Euclidean-norm tail: min(1, 2n exp(-r^2 / (2 n lambda_max(x)))). Reduces
/// to directional_tail at n = 1. Degenerate proxy gives 0.
inline double euclidean_tail(const Eigen::MatrixXd& x, long n, double r) {
  if (!(r > 0.0)) throw ConfigError("euclidean_tail: r must be > 0");
  if (n < 1) throw ConfigError("euclidean_tail: n must be >= 1");
  const double lambda_max = detail::max_eigenvalue_psd(x);
  if (lambda_max <= 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  return std::min(1.0, 2.0 * nd * std::exp(-r * r / (2.0 * nd * lambda_max)));
}

/// Horizon-T failure bound via validation loss:
///   min(1, 2n(T+1) exp(-r^2 / (2n Gamma_T (l_va + eps_gen)))).
/// A zero product Gamma_T (l_va + eps_gen) means a noiseless policy, whose
/// failure probability is 0 for r > 0.
inline FailureBound failure_bound(const FailureBoundQuery& query,
                                  double gamma) {
  query.validate();
  if (!(gamma >= 0.0)) throw ConfigError("failure_bound: gamma must be >= 0");

  const double nd = static_cast<double>(query.n);
  const double prefactor = 2.0 * nd * static_cast<double>(query.t_horizon + 1);
  const double scale = gamma * (query.l_va + query.eps_gen);

  FailureBound out;
  if (scale <= 0.0) {
    out.exponent = -std::numeric_limits<double>::infinity();
    out.raw = 0.0;
    out.bound = 0.0;
    return out;
  }
  out.exponent = -query.r * query.r / (2.0 * nd * scale);
  out.raw = prefactor * std::exp(out.exponent);
  out.bound = std::min(1.0, out.raw);
  return out;
}

/// Radius at which the stationary directional tail equals 5%:
/// r95 = sqrt(2 lambda_max(x_inf) ln 40).
inline double r95_threshold(const Eigen::MatrixXd& x_inf) {
  const double lambda_max = detail::max_eigenvalue_psd(x_inf);
  if (!(lambda_max > 0.0)) {
    throw ConfigError("r95_threshold: proxy must have lambda_max > 0");
  }
  return std::sqrt(2.0 * lambda_max * std::log(40.0));
}

inline double r95_threshold(double x_inf) {
  return r95_threshold(Eigen::MatrixXd::Constant(1, 1, x_inf));
}

/// Truncation bound rho_star^(2t) * psi * |x_bar| on |X_inf - X_t|.
inline double truncation_bound(double psi, double rho_star, long t,
                               double x_bar_norm) {
  if (!(rho_star >= 0.0) || !(rho_star < 1.0)) {
    throw ConfigError("truncation_bound: rho_star must be in [0, 1)");
  }
  if (t < 0) throw ConfigError("truncation_bound: t must be >= 0");
  return std::pow(rho_star, 2.0 * static_cast<double>(t)) * psi * x_bar_norm;
}

/// How to collapse a proxy matrix into the scalar loss entering the failure
/// bound. Trace is what the bound's derivation uses
/// (lambda_max(Sigma) <= tr(Sigma) = L_roll); MaxEigenvalue is the sharper
/// variant that skips that inequality and is not the published form.
enum class LossAggregation { kTrace, kMaxEigenvalue };

inline double rollout_loss(const Eigen::MatrixXd& sigma_roll,
                           LossAggregation aggregation =
                               LossAggregation::kTrace) {
  if (aggregation == LossAggregation::kTrace) return sigma_roll.trace();
  return detail::max_eigenvalue_psd(sigma_roll);
}

}  // namespace gainbound
