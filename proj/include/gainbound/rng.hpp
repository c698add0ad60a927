#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <utility>

#include "gainbound/errors.hpp"

namespace gainbound {

namespace detail {

// SplitMix64 finalizer. Bijective on 64-bit words with strong avalanche, so
// chaining it over (seed, stream, counter) gives collision-free, well-mixed
// draws without any sequential state.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Stateless counter-based generator. Every draw is a pure function of
/// (seed, stream, counter); ensembles key stream on the rollout index and
/// counter on (timestep, draw-within-step), which makes results independent
/// of execution order and parallel width by construction.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  std::uint64_t h = detail::mix64(seed ^ 0x9e3779b97f4a7c15ULL);
  h = detail::mix64(h ^ stream);
  h = detail::mix64(h ^ counter);
  return h;
}

/// Uniform draw in (0, 1]; never returns 0, so it can feed a logarithm.
inline double uniform_open01(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
  const std::uint64_t bits = counter_hash(seed, stream, counter) >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

/// Uniform draw in [0, 1).
inline double uniform_half_open01(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  const std::uint64_t bits = counter_hash(seed, stream, counter) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Box-Muller pair from two counters.
inline std::pair<double, double> normal_pair(std::uint64_t seed,
                                             std::uint64_t stream,
                                             std::uint64_t counter) {
  const double u1 = uniform_open01(seed, stream, counter);
  const double u2 = uniform_half_open01(seed, stream, counter + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

enum class NoiseKind { kGaussian, kBoundedUniform, kRademacherScaled };

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kBoundedUniform: return "bounded_uniform";
    case NoiseKind::kRademacherScaled: return "rademacher_scaled";
  }
  return "?";
}

/// Mean-zero sub-Gaussian action-error model. sigma_roll is the proxy
/// matrix: the exact covariance for Gaussian noise, diag(a^2) via the
/// Hoeffding bound for bounded uniform on [-a, a]^n and for scaled
/// Rademacher +-a. The sampler's true covariance never exceeds the proxy.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  Eigen::MatrixXd sigma_roll;
  Eigen::VectorXd scale;  // per-joint a; empty for gaussian

  static NoiseModel gaussian(const Eigen::MatrixXd& covariance) {
    NoiseModel model;
    model.kind = NoiseKind::kGaussian;
    model.sigma_roll = covariance;
    return model;
  }

  static NoiseModel gaussian(double variance) {
    return gaussian(Eigen::MatrixXd::Constant(1, 1, variance));
  }

  static NoiseModel bounded_uniform(const Eigen::VectorXd& a) {
    NoiseModel model;
    model.kind = NoiseKind::kBoundedUniform;
    model.scale = a;
    model.sigma_roll = a.cwiseProduct(a).asDiagonal();
    return model;
  }

  static NoiseModel rademacher_scaled(const Eigen::VectorXd& a) {
    NoiseModel model;
    model.kind = NoiseKind::kRademacherScaled;
    model.scale = a;
    model.sigma_roll = a.cwiseProduct(a).asDiagonal();
    return model;
  }

  Eigen::Index joints() const { return sigma_roll.rows(); }
};

/// Draws xi_t for a given (rollout, timestep) pair. Gaussian noise with a
/// non-diagonal proxy is correlated through the symmetric matrix square root
/// of sigma_roll.
class NoiseSampler {
 public:
  NoiseSampler(const NoiseModel& model, std::uint64_t seed)
      : model_(model), seed_(seed), n_(model.joints()) {
    if (n_ < 1) throw ConfigError("NoiseSampler: empty noise model");
    if (model_.kind == NoiseKind::kGaussian) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          ((model_.sigma_roll + model_.sigma_roll.transpose()) / 2.0).eval());
      if (es.info() != Eigen::Success) {
        throw SolverError("NoiseSampler: covariance factorization failed");
      }
      const double scale = std::max(1.0, model_.sigma_roll.cwiseAbs().maxCoeff());
      if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw ConfigError("NoiseSampler: gaussian covariance is not PSD");
      }
      sqrt_cov_ = es.eigenvectors() *
                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                  es.eigenvectors().transpose();
    } else if (model_.scale.size() != n_) {
      throw ConfigError("NoiseSampler: scale vector dimension mismatch");
    }
    // One uniform per coordinate, except Gaussian pairs use two.
    draws_per_step_ = (model_.kind == NoiseKind::kGaussian)
                          ? 2 * ((n_ + 1) / 2)
                          : n_;
  }

  Eigen::Index joints() const { return n_; }

  void sample(std::uint64_t rollout, std::uint64_t timestep,
              Eigen::VectorXd& out) const {
    const std::uint64_t base =
        timestep * static_cast<std::uint64_t>(draws_per_step_);
    out.resize(n_);
    switch (model_.kind) {
      case NoiseKind::kGaussian: {
        for (Eigen::Index i = 0; i < n_; i += 2) {
          const auto [z0, z1] = normal_pair(
              seed_, rollout, base + static_cast<std::uint64_t>(i));
          out(i) = z0;
          if (i + 1 < n_) out(i + 1) = z1;
        }
        if (n_ == 1) {
          out(0) *= std::sqrt(model_.sigma_roll(0, 0));
        } else {
          out = (sqrt_cov_ * out).eval();
        }
        break;
      }
      case NoiseKind::kBoundedUniform: {
        for (Eigen::Index i = 0; i < n_; ++i) {
          const double u = uniform_half_open01(
              seed_, rollout, base + static_cast<std::uint64_t>(i));
          out(i) = model_.scale(i) * (2.0 * u - 1.0);
        }
        break;
      }
      case NoiseKind::kRademacherScaled: {
        for (Eigen::Index i = 0; i < n_; ++i) {
          const double u = uniform_half_open01(
              seed_, rollout, base + static_cast<std::uint64_t>(i));
          out(i) = model_.scale(i) * (u < 0.5 ? -1.0 : 1.0);
        }
        break;
      }
    }
  }

 private:
  NoiseModel model_;
  std::uint64_t seed_;
  Eigen::Index n_;
  Eigen::Index draws_per_step_ = 0;
  Eigen::MatrixXd sqrt_cov_;
};

}  // namespace gainbound
