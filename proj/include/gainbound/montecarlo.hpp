#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "gainbound/bounds.hpp"
#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"
#include "gainbound/lyapunov.hpp"
#include "gainbound/rng.hpp"

namespace gainbound {

/// Ensemble dimensions plus the master seed. parallel_width only partitions
/// work; results are bit-identical for a fixed seed at any width.
struct EnsembleConfig {
  long n_rollouts = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
  int parallel_width = 1;

  void validate() const {
    if (n_rollouts < 1) throw ConfigError("EnsembleConfig: n_rollouts >= 1");
    if (horizon < 1) throw ConfigError("EnsembleConfig: horizon >= 1");
    if (parallel_width < 1) {
      throw ConfigError("EnsembleConfig: parallel_width >= 1");
    }
  }
};

/// Per-timestep percentile envelopes of |e_t|; values(t, k) is the
/// levels[k]-th nearest-rank percentile at step t.
struct PercentileTable {
  std::vector<double> levels;
  Eigen::MatrixXd values;  // (horizon + 1) x levels.size()

  bool empty() const { return levels.empty(); }
};

/// Aggregate ensemble results. rollout_peak_norms holds max_t |e_t| per
/// rollout in index order so radius sweeps can reuse one ensemble.
struct EnsembleStats {
  double failure_rate = 0.0;
  double ci_halfwidth = 0.0;
  PercentileTable envelopes;
  double max_abs_error = 0.0;
  double r95_theory = 0.0;  // sqrt(2 lambda_max(X_inf) ln 40)
  std::vector<double> rollout_peak_norms;
};

/// One rollout of x_{t+1} = A x_t + B xi_t from x_0 = 0; returns the
/// position errors e_0 .. e_T.
inline std::vector<Eigen::VectorXd> rollout(const DiscreteClosedLoop& loop,
                                            const NoiseSampler& sampler,
                                            long horizon,
                                            std::uint64_t rollout_index) {
  if (sampler.joints() != loop.joints()) {
    throw ConfigError("rollout: noise dimension mismatch");
  }
  std::vector<Eigen::VectorXd> errors;
  errors.reserve(static_cast<size_t>(horizon) + 1);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(loop.a.rows());
  Eigen::VectorXd x_next(loop.a.rows());
  Eigen::VectorXd xi(loop.joints());
  errors.push_back(loop.c * x);
  for (long t = 0; t < horizon; ++t) {
    sampler.sample(rollout_index, static_cast<std::uint64_t>(t), xi);
    x_next.noalias() = loop.a * x;
    x_next.noalias() += loop.b * xi;
    x.swap(x_next);
    errors.push_back(loop.c * x);
  }
  return errors;
}

namespace detail {

// Nearest-rank percentile of a sortable buffer: the ceil(level/100 * N)-th
// smallest value.
inline double nearest_rank(std::vector<double>& buffer, double level) {
  const auto n = static_cast<long>(buffer.size());
  long rank = static_cast<long>(
      std::ceil(level / 100.0 * static_cast<double>(n)));
  rank = std::clamp(rank, 1L, n);
  std::nth_element(buffer.begin(), buffer.begin() + (rank - 1), buffer.end());
  return buffer[static_cast<size_t>(rank - 1)];
}

}  // namespace detail

/// Runs the full ensemble once: per-rollout peak norms, failure rate against
/// `radius` (|e_t| >= radius at any t <= T counts, including t = 0), the
/// requested percentile envelopes and the theoretical r95 overlay.
///
/// Rollouts are split over parallel_width threads in fixed contiguous index
/// blocks; every quantity is then reduced sequentially in rollout order, so
/// the output is a pure function of (config, loop, noise).
inline EnsembleStats simulate_ensemble(const DiscreteClosedLoop& loop,
                                       const NoiseModel& noise,
                                       const EnsembleConfig& config,
                                       double radius,
                                       const std::vector<double>& levels) {
  config.validate();
  for (double level : levels) {
    if (!(level > 0.0 && level < 100.0)) {
      throw ConfigError("simulate_ensemble: percentile levels must lie in "
                        "(0, 100)");
    }
  }
  const NoiseSampler sampler(noise, config.seed);
  if (sampler.joints() != loop.joints()) {
    throw ConfigError("simulate_ensemble: noise dimension mismatch");
  }

  const long n_rollouts = config.n_rollouts;
  const long horizon = config.horizon;
  const bool want_envelopes = !levels.empty();

  // norms(t, i) = |e_t| of rollout i; kept in full for percentile extraction.
  Eigen::MatrixXd norms;
  if (want_envelopes) norms.resize(horizon + 1, n_rollouts);
  std::vector<double> peaks(static_cast<size_t>(n_rollouts), 0.0);

  const int width = static_cast<int>(
      std::min<long>(config.parallel_width, n_rollouts));
  auto worker = [&](long begin, long end) {
    Eigen::VectorXd x(loop.a.rows());
    Eigen::VectorXd x_next(loop.a.rows());
    Eigen::VectorXd xi(loop.joints());
    for (long i = begin; i < end; ++i) {
      x.setZero();
      double peak = 0.0;
      if (want_envelopes) norms(0, i) = 0.0;
      for (long t = 0; t < horizon; ++t) {
        sampler.sample(static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(t), xi);
        x_next.noalias() = loop.a * x;
        x_next.noalias() += loop.b * xi;
        x.swap(x_next);
        const double norm = (loop.c * x).norm();
        peak = std::max(peak, norm);
        if (want_envelopes) norms(t + 1, i) = norm;
      }
      peaks[static_cast<size_t>(i)] = peak;
    }
  };

  if (width == 1) {
    worker(0, n_rollouts);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(width));
    const long block = (n_rollouts + width - 1) / width;
    for (int w = 0; w < width; ++w) {
      const long begin = static_cast<long>(w) * block;
      const long end = std::min(begin + block, n_rollouts);
      if (begin >= end) break;
      threads.emplace_back(worker, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  EnsembleStats stats;
  stats.rollout_peak_norms = peaks;

  long failures = 0;
  double max_abs = 0.0;
  for (long i = 0; i < n_rollouts; ++i) {
    if (peaks[static_cast<size_t>(i)] >= radius) ++failures;
    max_abs = std::max(max_abs, peaks[static_cast<size_t>(i)]);
  }
  stats.failure_rate =
      static_cast<double>(failures) / static_cast<double>(n_rollouts);
  stats.ci_halfwidth =
      1.96 * std::sqrt(stats.failure_rate * (1.0 - stats.failure_rate) /
                       static_cast<double>(n_rollouts));
  stats.max_abs_error = max_abs;

  if (want_envelopes) {
    stats.envelopes.levels = levels;
    stats.envelopes.values.resize(horizon + 1,
                                  static_cast<Eigen::Index>(levels.size()));
    std::vector<double> buffer(static_cast<size_t>(n_rollouts));
    for (long t = 0; t <= horizon; ++t) {
      for (long i = 0; i < n_rollouts; ++i) {
        buffer[static_cast<size_t>(i)] = norms(t, i);
      }
      for (size_t k = 0; k < levels.size(); ++k) {
        stats.envelopes.values(t, static_cast<Eigen::Index>(k)) =
            detail::nearest_rank(buffer, levels[k]);
      }
    }
  }

  const Eigen::MatrixXd x_inf = stationary_proxy(loop, noise.sigma_roll).x;
  // Degenerate (noiseless) proxies have no finite tail threshold; report 0.
  stats.r95_theory =
      detail::max_eigenvalue_psd(x_inf) > 0.0 ? r95_threshold(x_inf) : 0.0;
  return stats;
}

/// Empirical failure rate over the tube radius r, with the normal 95% CI
/// half-width 1.96 sqrt(p(1-p)/N). The boundary |e_t| = r counts as failure,
/// so r = 0 always fails through e_0 = 0.
inline EnsembleStats failure_rate(const DiscreteClosedLoop& loop,
                                  const NoiseModel& noise, long horizon,
                                  double radius,
                                  const EnsembleConfig& config) {
  if (radius < 0.0) throw ConfigError("failure_rate: radius must be >= 0");
  EnsembleConfig cfg = config;
  cfg.horizon = horizon;
  return simulate_ensemble(loop, noise, cfg, radius, {});
}

/// Percentile envelopes of |e_t| at the requested levels, plus the r95
/// overlay. No tube radius is involved, so the reported failure_rate is 0
/// (radius = infinity).
inline EnsembleStats percentile_envelopes(const DiscreteClosedLoop& loop,
                                          const NoiseModel& noise,
                                          long horizon,
                                          const EnsembleConfig& config,
                                          const std::vector<double>& levels) {
  EnsembleConfig cfg = config;
  cfg.horizon = horizon;
  return simulate_ensemble(loop, noise, cfg,
                           std::numeric_limits<double>::infinity(), levels);
}

/// Sample covariance of e_t over the ensemble (mean-centered, 1/(N-1)).
/// Oracle for the proxy recursion: equals X_t in expectation for Gaussian
/// noise and is dominated by it for the other kinds.
inline Eigen::MatrixXd empirical_position_covariance(
    const DiscreteClosedLoop& loop, const NoiseModel& noise, long t,
    const EnsembleConfig& config) {
  if (t < 1) throw ConfigError("empirical_position_covariance: t >= 1");
  EnsembleConfig cfg = config;
  cfg.horizon = t;
  cfg.validate();
  const NoiseSampler sampler(noise, cfg.seed);
  const Eigen::Index n = loop.joints();
  const long n_rollouts = cfg.n_rollouts;

  Eigen::MatrixXd samples(n, n_rollouts);
  const int width = static_cast<int>(
      std::min<long>(cfg.parallel_width, n_rollouts));
  auto worker = [&](long begin, long end) {
    Eigen::VectorXd x(loop.a.rows());
    Eigen::VectorXd x_next(loop.a.rows());
    Eigen::VectorXd xi(n);
    for (long i = begin; i < end; ++i) {
      x.setZero();
      for (long step = 0; step < t; ++step) {
        sampler.sample(static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(step), xi);
        x_next.noalias() = loop.a * x;
        x_next.noalias() += loop.b * xi;
        x.swap(x_next);
      }
      samples.col(i) = loop.c * x;
    }
  };
  if (width == 1) {
    worker(0, n_rollouts);
  } else {
    std::vector<std::thread> threads;
    const long block = (n_rollouts + width - 1) / width;
    for (int w = 0; w < width; ++w) {
      const long begin = static_cast<long>(w) * block;
      const long end = std::min(begin + block, n_rollouts);
      if (begin >= end) break;
      threads.emplace_back(worker, begin, end);
    }
    for (auto& th : threads) th.join();
  }

  const Eigen::VectorXd mean = samples.rowwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n_rollouts; ++i) {
    const Eigen::VectorXd centered = samples.col(i) - mean;
    cov.noalias() += centered * centered.transpose();
  }
  return cov / static_cast<double>(n_rollouts - 1);
}

}  // namespace gainbound
