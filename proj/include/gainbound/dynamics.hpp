#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>
#include <utility>

#include "gainbound/errors.hpp"
#include "gainbound/matrix_exp.hpp"

namespace gainbound {

/// Default margin below 1 that the spectral radius of a discretized loop must
/// respect. The theory only demands rho < 1; the margin guards roundoff.
inline constexpr double kStabilityMargin = 1e-9;

/// Rigid plant under PD position control: joint count n, SPD inertia M and
/// the control period in seconds.
struct PlantModel {
  Eigen::MatrixXd mass;  // n x n, symmetric positive definite
  double dt = 0.0;       // seconds

  PlantModel(Eigen::MatrixXd m, double dt_seconds)
      : mass(std::move(m)), dt(dt_seconds) {
    validate();
  }

  /// Single-joint convenience.
  PlantModel(double m, double dt_seconds)
      : PlantModel(Eigen::MatrixXd::Constant(1, 1, m), dt_seconds) {}

  Eigen::Index joints() const { return mass.rows(); }

  void validate() const {
    if (mass.rows() < 1 || mass.rows() != mass.cols()) {
      throw ConfigError("PlantModel: mass matrix must be square, n >= 1");
    }
    if (!(dt > 0.0)) {
      throw ConfigError("PlantModel: control period dt must be positive");
    }
    const double scale = mass.cwiseAbs().maxCoeff();
    if ((mass - mass.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw ConfigError("PlantModel: mass matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass);
    if (es.info() != Eigen::Success) {
      throw SolverError("PlantModel: eigen decomposition of mass failed");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
      std::ostringstream msg;
      msg << "PlantModel: mass matrix is not positive definite (min "
             "eigenvalue "
          << es.eigenvalues().minCoeff() << ")";
      throw ConfigError(msg.str());
    }
  }
};

/// Diagonal PD gains, one stiffness/damping pair per joint. Entries must be
/// strictly positive.
struct GainSetting {
  Eigen::VectorXd kp;
  Eigen::VectorXd kd;

  GainSetting(Eigen::VectorXd stiffness, Eigen::VectorXd damping)
      : kp(std::move(stiffness)), kd(std::move(damping)) {
    if (kp.size() != kd.size() || kp.size() < 1) {
      throw ConfigError("GainSetting: kp and kd must have equal size >= 1");
    }
    if (kp.minCoeff() <= 0.0 || kd.minCoeff() <= 0.0) {
      throw ConfigError("GainSetting: all gains must be strictly positive");
    }
  }

  GainSetting(double stiffness, double damping)
      : GainSetting(Eigen::VectorXd::Constant(1, stiffness),
                    Eigen::VectorXd::Constant(1, damping)) {}

  Eigen::Index joints() const { return kp.size(); }
};

/// Linearized tracking-error dynamics in continuous time,
///   x' = a_c x + b_c xi,  e = c x,
/// with x = [e, e'] stacked position and velocity error.
struct ContinuousErrorSystem {
  Eigen::MatrixXd a_c;  // 2n x 2n
  Eigen::MatrixXd b_c;  // 2n x n
  Eigen::MatrixXd c;    // n x 2n position selector [I 0]

  Eigen::Index joints() const { return b_c.cols(); }
};

/// Exact ZOH sampling of a ContinuousErrorSystem, with its recomputed
/// spectral radius as a stability certificate (rho < 1 by construction).
struct DiscreteClosedLoop {
  Eigen::MatrixXd a;  // 2n x 2n
  Eigen::MatrixXd b;  // 2n x n
  Eigen::MatrixXd c;  // n x 2n
  double spectral_radius = 0.0;
  double dt = 0.0;

  Eigen::Index joints() const { return b.cols(); }
};

/// Largest eigenvalue modulus of a general square matrix.
inline double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw ConfigError("spectral_radius: matrix must be square");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw SolverError("spectral_radius: eigen solver did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Builds the continuous error system for a plant and gain setting:
///   a_c = [[0, I], [-M^-1 Kp, -M^-1 Kd]],  b_c = [[0], [M^-1 Kp]],
///   c = [I, 0].
inline ContinuousErrorSystem build_error_dynamics(const PlantModel& plant,
                                                  const GainSetting& gains) {
  const Eigen::Index n = plant.joints();
  if (gains.joints() != n) {
    std::ostringstream msg;
    msg << "build_error_dynamics: plant has " << n << " joints but gains have "
        << gains.joints();
    throw ConfigError(msg.str());
  }

  // M is SPD (validated), so the LLT solve is well posed.
  const Eigen::LLT<Eigen::MatrixXd> llt(plant.mass);
  const Eigen::MatrixXd m_inv_kp =
      llt.solve(Eigen::MatrixXd(gains.kp.asDiagonal()));
  const Eigen::MatrixXd m_inv_kd =
      llt.solve(Eigen::MatrixXd(gains.kd.asDiagonal()));

  ContinuousErrorSystem sys;
  sys.a_c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.a_c.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  sys.a_c.bottomLeftCorner(n, n) = -m_inv_kp;
  sys.a_c.bottomRightCorner(n, n) = -m_inv_kd;

  sys.b_c = Eigen::MatrixXd::Zero(2 * n, n);
  sys.b_c.bottomRows(n) = m_inv_kp;

  sys.c = Eigen::MatrixXd::Zero(n, 2 * n);
  sys.c.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
  return sys;
}

/// Exact zero-order-hold discretization over one control period. Both the
/// transition matrix exp(a_c dt) and the held-input matrix
/// (integral_0^dt exp(a_c s) ds) b_c come out of a single exponential of the
/// augmented block matrix [[a_c, b_c], [0, 0]] (Van Loan).
///
/// Throws UnstableLoopError when the sampled loop violates the stability
/// margin, carrying the offending spectral radius.
inline DiscreteClosedLoop zoh_discretize(const ContinuousErrorSystem& sys,
                                         double dt,
                                         double stability_margin =
                                             kStabilityMargin) {
  if (!(dt > 0.0)) {
    throw ConfigError("zoh_discretize: dt must be positive");
  }
  const Eigen::Index m = sys.a_c.rows();
  const Eigen::Index k = sys.b_c.cols();

  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(m + k, m + k);
  augmented.topLeftCorner(m, m) = sys.a_c;
  augmented.topRightCorner(m, k) = sys.b_c;
  const Eigen::MatrixXd big = matrix_exponential(augmented * dt);

  DiscreteClosedLoop loop;
  loop.a = big.topLeftCorner(m, m);
  loop.b = big.topRightCorner(m, k);
  loop.c = sys.c;
  loop.dt = dt;
  loop.spectral_radius = spectral_radius(loop.a);

  if (loop.spectral_radius >= 1.0 - stability_margin) {
    std::ostringstream msg;
    msg << "zoh_discretize: sampled loop is not Schur stable, rho = "
        << loop.spectral_radius;
    throw UnstableLoopError(loop.spectral_radius, msg.str());
  }
  return loop;
}

/// One-call helper: error dynamics plus ZOH sampling at the plant's period.
inline DiscreteClosedLoop discretize_plant(const PlantModel& plant,
                                           const GainSetting& gains,
                                           double stability_margin =
                                               kStabilityMargin) {
  return zoh_discretize(build_error_dynamics(plant, gains), plant.dt,
                        stability_margin);
}

/// Closed-form ZOH eigenvalues of the scalar canonical loop,
///   lambda_{1,2} = exp(((-beta +- sqrt(beta^2 - 4 m alpha)) / (2m)) dt),
/// using the complex root when underdamped. Both moduli are < 1 whenever
/// alpha, beta > 0.
inline std::pair<std::complex<double>, std::complex<double>>
canonical_zoh_eigenvalues(double alpha, double beta, double m, double dt) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(m > 0.0) || !(dt > 0.0)) {
    throw ConfigError(
        "canonical_zoh_eigenvalues: alpha, beta, m, dt must be positive");
  }
  const std::complex<double> discriminant(beta * beta - 4.0 * m * alpha, 0.0);
  const std::complex<double> root = std::sqrt(discriminant);
  const std::complex<double> lam1 = std::exp((-beta + root) / (2.0 * m) * dt);
  const std::complex<double> lam2 = std::exp((-beta - root) / (2.0 * m) * dt);
  return {lam1, lam2};
}

}  // namespace gainbound
