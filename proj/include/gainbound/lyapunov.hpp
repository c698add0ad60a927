#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>
#include <sstream>

#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"

namespace gainbound {

/// Relative residual both Lyapunov solvers must meet; exceeding it raises
/// SolverError instead of returning a silently inaccurate solution.
inline constexpr double kLyapunovResidualTol = 1e-10;

/// Proxy matrix S (2n x 2n, PSD) together with its position projection
/// X = C S C^T. horizon is empty for the stationary solution, in which case
/// residual holds the achieved Frobenius residual of the Lyapunov equation.
struct ProxyResult {
  Eigen::MatrixXd s;
  Eigen::MatrixXd x;
  std::optional<long> horizon;  // empty = infinite
  double residual = 0.0;
};

namespace detail {

inline Eigen::MatrixXd kronecker(const Eigen::MatrixXd& p,
                                 const Eigen::MatrixXd& q) {
  Eigen::MatrixXd out(p.rows() * q.rows(), p.cols() * q.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      out.block(i * q.rows(), j * q.cols(), q.rows(), q.cols()) = p(i, j) * q;
    }
  }
  return out;
}

inline void require_psd(const Eigen::MatrixXd& q, const char* who) {
  if (q.rows() != q.cols()) {
    throw ConfigError(std::string(who) + ": matrix must be square");
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError(std::string(who) + ": matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.info() != Eigen::Success) {
    throw SolverError(std::string(who) + ": eigen decomposition failed");
  }
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    std::ostringstream msg;
    msg << who << ": matrix is not PSD (min eigenvalue "
        << es.eigenvalues().minCoeff() << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace detail

/// Solves S = a S a^T + q for Schur-stable a by the dense Kronecker route:
/// (I - a (x) a) vec(S) = vec(q). Dimensions here stay tiny, so the direct
/// solve is simpler and more predictable than an iterative scheme. The
/// result is symmetrized and its residual checked against
/// kLyapunovResidualTol * (1 + |q|_F).
inline Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& a,
                                               const Eigen::MatrixXd& q) {
  detail::require_psd(q, "solve_discrete_lyapunov");
  const double rho = spectral_radius(a);
  if (rho >= 1.0 - kStabilityMargin) {
    std::ostringstream msg;
    msg << "solve_discrete_lyapunov: rho(a) = " << rho << " >= 1";
    throw UnstableLoopError(rho, msg.str());
  }

  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd op = Eigen::MatrixXd::Identity(n * n, n * n) -
                             detail::kronecker(a, a);
  const Eigen::VectorXd vec_q =
      Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  const Eigen::VectorXd vec_s = op.partialPivLu().solve(vec_q);

  Eigen::MatrixXd s = Eigen::Map<const Eigen::MatrixXd>(vec_s.data(), n, n);
  s = ((s + s.transpose()) / 2.0).eval();

  const double residual = (s - a * s * a.transpose() - q).norm();
  if (!(residual <= kLyapunovResidualTol * (1.0 + q.norm()))) {
    std::ostringstream msg;
    msg << "solve_discrete_lyapunov: residual " << residual
        << " exceeds tolerance (singular or ill-conditioned system)";
    throw SolverError(msg.str());
  }
  return s;
}

/// Solves a_c P + P a_c^T + q = 0 for Hurwitz a_c via the Kronecker-sum
/// operator (I (x) a_c + a_c (x) I) vec(P) = -vec(q).
inline Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& a_c,
                                                 const Eigen::MatrixXd& q) {
  detail::require_psd(q, "solve_continuous_lyapunov");
  if (a_c.rows() != a_c.cols()) {
    throw ConfigError("solve_continuous_lyapunov: matrix must be square");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a_c, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw SolverError("solve_continuous_lyapunov: eigen solver failed");
  }
  const double max_real = es.eigenvalues().real().maxCoeff();
  if (max_real >= 0.0) {
    std::ostringstream msg;
    msg << "solve_continuous_lyapunov: a_c is not Hurwitz (max eigenvalue "
           "real part "
        << max_real << ")";
    throw ConfigError(msg.str());
  }

  const Eigen::Index n = a_c.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd op =
      detail::kronecker(id, a_c) + detail::kronecker(a_c, id);
  const Eigen::VectorXd vec_q =
      Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  const Eigen::VectorXd vec_p = op.partialPivLu().solve(-vec_q);

  Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n);
  p = ((p + p.transpose()) / 2.0).eval();

  const double residual = (a_c * p + p * a_c.transpose() + q).norm();
  if (!(residual <= kLyapunovResidualTol * (1.0 + q.norm()))) {
    std::ostringstream msg;
    msg << "solve_continuous_lyapunov: residual " << residual
        << " exceeds tolerance";
    throw SolverError(msg.str());
  }
  return p;
}

/// Finite-horizon proxy S_t = sum_{s<t} A^s B Sigma B^T (A^T)^s, accumulated
/// by the recursion S_{k+1} = A S_k A^T + B Sigma B^T (algebraically the same
/// sum, no explicit matrix powers). x is the position projection C S C^T.
inline ProxyResult finite_horizon_proxy(const DiscreteClosedLoop& loop,
                                        const Eigen::MatrixXd& sigma_roll,
                                        long t) {
  if (t < 1) {
    throw ConfigError("finite_horizon_proxy: horizon must be >= 1");
  }
  if (sigma_roll.rows() != loop.joints()) {
    throw ConfigError("finite_horizon_proxy: sigma_roll dimension mismatch");
  }
  detail::require_psd(sigma_roll, "finite_horizon_proxy");

  const Eigen::MatrixXd step_cov =
      loop.b * sigma_roll * loop.b.transpose();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(loop.a.rows(), loop.a.cols());
  for (long k = 0; k < t; ++k) {
    s = loop.a * s * loop.a.transpose() + step_cov;
  }
  s = ((s + s.transpose()) / 2.0).eval();

  ProxyResult result;
  result.s = s;
  result.x = loop.c * s * loop.c.transpose();
  result.horizon = t;
  result.residual = 0.0;
  return result;
}

/// Stationary proxy S_inf from the discrete Lyapunov equation
/// S = A S A^T + B Sigma B^T, with the achieved residual recorded.
inline ProxyResult stationary_proxy(const DiscreteClosedLoop& loop,
                                    const Eigen::MatrixXd& sigma_roll) {
  if (sigma_roll.rows() != loop.joints()) {
    throw ConfigError("stationary_proxy: sigma_roll dimension mismatch");
  }
  detail::require_psd(sigma_roll, "stationary_proxy");

  const Eigen::MatrixXd step_cov = loop.b * sigma_roll * loop.b.transpose();
  const Eigen::MatrixXd sym_cov =
      ((step_cov + step_cov.transpose()) / 2.0).eval();
  ProxyResult result;
  result.s = solve_discrete_lyapunov(loop.a, sym_cov);
  result.x = loop.c * result.s * loop.c.transpose();
  result.horizon = std::nullopt;
  result.residual =
      (result.s - loop.a * result.s * loop.a.transpose() - sym_cov).norm();
  return result;
}

}  // namespace gainbound
