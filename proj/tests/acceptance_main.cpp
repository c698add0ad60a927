// Acceptance suite: runs every published-level criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exits nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "gainbound/gainbound.hpp"
#include "support/test_oracles.hpp"

using namespace gainbound;

namespace {

struct Reporter {
  int failures = 0;

  void report(int id, const std::string& name, bool ok,
              const std::string& detail) {
    std::printf("[%s] %2d. %-38s %s\n", ok ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

const std::vector<std::pair<double, double>> kRegimeGains = {
    {50.0, 40.0}, {100.0, 40.0}, {50.0, 20.0}, {100.0, 20.0}};
const char* kRegimeNames[] = {"CO", "SO", "CU", "SU"};

DiscreteClosedLoop regime_loop(int i, double dt = 0.02) {
  return discretize_plant(PlantModel(1.0, dt),
                          GainSetting(kRegimeGains[i].first,
                                      kRegimeGains[i].second));
}

}  // namespace

int main() {
  Reporter reporter;
  const Eigen::MatrixXd unit_sigma = Eigen::MatrixXd::Identity(1, 1);
  const NoiseModel gaussian = NoiseModel::gaussian(1.0);

  // 1. Spectral radii of the four regimes, within 1e-3, under one second.
  {
    const auto start = std::chrono::steady_clock::now();
    const double expected[] = {0.974, 0.948, 0.943, 0.819};
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
      worst = std::max(worst,
                       std::abs(regime_loop(i).spectral_radius - expected[i]));
    }
    const double elapsed = seconds_since(start);
    reporter.report(1, "spectral radii of the regime quad",
                    worst <= 1e-3 && elapsed < 1.0,
                    fmt("max |rho - table| = %.2e, %.3f s", worst, elapsed));
  }

  // 2. Continuous stationary variances: closed form exact to 1e-12 and
  //    matching the continuous Lyapunov solve to 1e-9.
  {
    const double expected[] = {0.625, 1.25, 1.25, 2.5};
    double worst_formula = 0.0, worst_solver = 0.0;
    for (int i = 0; i < 4; ++i) {
      const auto [alpha, beta] = kRegimeGains[i];
      worst_formula = std::max(
          worst_formula,
          std::abs(continuous_position_variance(alpha, beta, 1.0) -
                   expected[i]));
      const auto sys = build_error_dynamics(PlantModel(1.0, 0.02),
                                            GainSetting(alpha, beta));
      const Eigen::MatrixXd p = solve_continuous_lyapunov(
          sys.a_c, sys.b_c * sys.b_c.transpose());
      worst_solver = std::max(worst_solver,
                              std::abs(p(0, 0) - expected[i]));
    }
    reporter.report(2, "continuous stationary variances",
                    worst_formula <= 1e-12 && worst_solver <= 1e-9,
                    fmt("formula dev %.1e, solver dev %.1e", worst_formula,
                        worst_solver));
  }

  // 3. Discrete stationary proxies within 5e-4 of the table, ratio row
  //    within 1%.
  {
    const double expected[] = {0.012, 0.025, 0.025, 0.050};
    const double expected_ratio[] = {1.0, 2.0, 2.0, 4.0};
    double x_d[4];
    double worst = 0.0, worst_ratio = 0.0;
    for (int i = 0; i < 4; ++i) {
      x_d[i] = stationary_proxy(regime_loop(i), unit_sigma).x(0, 0);
      worst = std::max(worst, std::abs(x_d[i] - expected[i]));
    }
    for (int i = 0; i < 4; ++i) {
      worst_ratio = std::max(
          worst_ratio,
          std::abs(x_d[i] / x_d[0] - expected_ratio[i]) / expected_ratio[i]);
    }
    reporter.report(3, "discrete stationary proxies",
                    worst <= 5e-4 && worst_ratio <= 0.01,
                    fmt("max |X_d - table| = %.2e, ratio dev %.2e%%", worst,
                        100.0 * worst_ratio));
  }

  // 4. Monte Carlo failure rates at N = 50000, T = 50, r = 0.3.
  {
    const auto start = std::chrono::steady_clock::now();
    const EnsembleConfig config{50000, 50, 42, 1};
    const double expected[] = {0.01, 0.26, 0.22, 0.75};
    const double tolerance[] = {0.01, 0.02, 0.02, 0.02};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
      const double rate =
          failure_rate(regime_loop(i), gaussian, 50, 0.3, config)
              .failure_rate;
      if (std::abs(rate - expected[i]) > tolerance[i]) ok = false;
      detail += fmt("%s=%.4f ", kRegimeNames[i], rate);
    }
    const double elapsed = seconds_since(start);
    detail += fmt("(%.1f s)", elapsed);
    reporter.report(4, "Monte Carlo failure rates", ok && elapsed < 60.0,
                    detail);
  }

  // 5. Empirical 95th percentile under the r95 threshold at every step.
  {
    bool ok = true;
    double worst_margin = 1e9;
    for (int i = 0; i < 4; ++i) {
      const auto loop = regime_loop(i);
      const EnsembleStats stats = percentile_envelopes(
          loop, gaussian, 50, {50000, 50, 42, 1}, {95.0});
      const double r95 =
          r95_threshold(stationary_proxy(loop, unit_sigma).x);
      for (Eigen::Index t = 0; t <= 50; ++t) {
        worst_margin = std::min(worst_margin,
                                r95 - stats.envelopes.values(t, 0));
        if (stats.envelopes.values(t, 0) > r95) ok = false;
      }
    }
    reporter.report(5, "95th percentile inside r95 envelope", ok,
                    fmt("min slack %.4f", worst_margin));
  }

  // 6. Strict monotonicity of X_inf over a 50 x 50 grid on [5, 200]^2.
  {
    SweepSpec spec;  // defaults: [5, 200]^2, resolution 50, dt = 0.02
    const SweepResult sweep =
        sweep_heatmap(spec, RegimeQuad(50.0, 100.0, 20.0, 40.0));
    const int n = spec.resolution;
    auto value = [&](int i, int j) {
      return sweep.cells[static_cast<size_t>(i * n + j)].x_inf_d;
    };
    bool ok = true;
    for (int i = 0; i + 1 < n && ok; ++i) {
      for (int j = 0; j < n && ok; ++j) {
        if (!(value(i + 1, j) > value(i, j))) ok = false;  // kp direction
        if (!(value(j, i + 1) < value(j, i))) ok = false;  // kd direction
      }
    }
    reporter.report(6, "grid monotonicity of X_inf", ok,
                    fmt("%d cells checked", n * n));
  }

  // 7. Failure-curve dominance and preserved regime ordering over the
  //    radius grid.
  {
    StudyConfig study;
    study.parallel_width = 1;
    std::vector<double> r_grid;
    for (int i = 1; i <= 10; ++i) r_grid.push_back(0.1 * i);
    const auto curves = failure_curve(study, r_grid);

    bool dominated = true;
    for (const auto& curve : curves) {
      for (const auto& point : curve.points) {
        if (point.bound < point.empirical) dominated = false;
      }
    }

    auto se = [&](double p) {
      return std::sqrt(p * (1.0 - p) / 50000.0);
    };
    // Hasse edges CO<=SO, CO<=CU, SO<=SU, CU<=SU wherever rates separate
    // beyond three combined standard errors.
    const int edges[4][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    bool ordered = true;
    for (size_t k = 0; k < r_grid.size(); ++k) {
      for (const auto& edge : edges) {
        const double lo = curves[edge[0]].points[k].empirical;
        const double hi = curves[edge[1]].points[k].empirical;
        const double sep = 3.0 * (se(lo) + se(hi));
        if (std::abs(hi - lo) > sep && hi < lo) ordered = false;
      }
    }
    reporter.report(7, "bound dominates and ordering preserved",
                    dominated && ordered,
                    fmt("dominated=%d ordered=%d", dominated ? 1 : 0,
                        ordered ? 1 : 0));
  }

  // 8. ZOH inheritance: X_inf^d/dt -> X_inf^c with X_inf^d scaling as
  //    dt^1 (order-of-convergence slope within [0.8, 1.2]). The error in
  //    X_inf^d/dt itself vanishes at second order (the first-order term
  //    cancels), reported alongside.
  {
    const std::vector<double> dts{0.02, 0.01, 0.005, 0.0025};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
      const auto [alpha, beta] = kRegimeGains[i];
      const auto records = zoh_inheritance_study(alpha, beta, 1.0, dts);
      std::vector<double> x_ds, errors;
      for (size_t k = 0; k < records.size(); ++k) {
        x_ds.push_back(records[k].x_d);
        errors.push_back(records[k].rel_error);
        if (k > 0 && !(records[k].rel_error < records[k - 1].rel_error)) {
          ok = false;
        }
      }
      const double scaling = loglog_slope(dts, x_ds);
      const double error_order = loglog_slope(dts, errors);
      if (!(scaling >= 0.8 && scaling <= 1.2)) ok = false;
      if (!(records.back().rel_error <= 0.005)) ok = false;
      detail += fmt("%s:%.3f/%.2f ", kRegimeNames[i], scaling, error_order);
    }
    reporter.report(8, "ZOH inheritance (dt-scaling / error order)", ok,
                    detail);
  }

  // 9. Long-horizon amplification asymptote and the geometric bound.
  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 4; ++i) {
      const auto [alpha, beta] = kRegimeGains[i];
      const auto loop = regime_loop(i);
      const double gamma_long = amplification_index(loop, 2000).gamma;
      const double ratio = gamma_long * 2.0 * beta / (alpha * 0.02);
      if (!(ratio >= 0.98 && ratio <= 1.02)) ok = false;

      const double gamma_50 = amplification_index(loop, 50).gamma;
      if (!(amplification_geometric_bound(loop, 50).bound >= gamma_50)) {
        ok = false;
      }
      detail += fmt("%s:%.4f ", kRegimeNames[i], ratio);
    }
    reporter.report(9, "Gamma_T asymptote and geometric bound", ok, detail);
  }

  // 10. Scalar certificate dominates the stationary proxy for random
  //     diagonal multi-joint systems.
  {
    std::mt19937_64 rng(1001);
    double worst = 1e9;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 1 + static_cast<Eigen::Index>(
                                     testsupport::uniform(rng, 0.0, 5.999));
      Eigen::VectorXd masses(n), kp(n), kd(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        masses(j) = testsupport::uniform(rng, 0.5, 1.5);
        kp(j) = 10.0 * std::pow(20.0, testsupport::uniform(rng, 0.0, 1.0));
        kd(j) = testsupport::uniform(rng, 10.0, 80.0);
      }
      const PlantModel plant(Eigen::MatrixXd(masses.asDiagonal()), 0.02);
      const GainSetting gains(kp, kd);
      const Eigen::MatrixXd sigma = testsupport::random_psd(rng, n, 0.25);
      const ShapeStructure structure =
          multijoint_structure(plant, gains, sigma);
      const Eigen::MatrixXd gap =
          ordering_index(structure) * structure.x_bar -
          stationary_proxy(discretize_plant(plant, gains), sigma).x;
      worst = std::min(worst,
                       Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap)
                           .eigenvalues()
                           .minCoeff());
    }
    reporter.report(10, "certificate dominance (20 random systems)",
                    worst >= -1e-10, fmt("min eigenvalue %.2e", worst));
  }

  // 11. Oracle equivalence: six-term sum to 1e-12 and Gaussian Monte Carlo
  //     covariance at t = 50 within 4/sqrt(N) relative Frobenius error.
  {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4242);
    double worst_sum = 0.0, worst_cov = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 1 + static_cast<Eigen::Index>(
                                     testsupport::uniform(rng, 0.0, 3.999));
      const auto loop = testsupport::random_stable_loop(
          rng, n, testsupport::uniform(rng, 0.3, 0.9));
      const Eigen::MatrixXd sigma = testsupport::random_psd(rng, n);

      const Eigen::MatrixXd brute =
          testsupport::brute_force_proxy(loop.a, loop.b, sigma, 6);
      const Eigen::MatrixXd recursive =
          finite_horizon_proxy(loop, sigma, 6).s;
      worst_sum = std::max(worst_sum, (recursive - brute).norm() /
                                          (1.0 + brute.norm()));

      const long n_rollouts = 200000;
      const Eigen::MatrixXd cov = empirical_position_covariance(
          loop, NoiseModel::gaussian(sigma), 50, {n_rollouts, 50, 4242, 1});
      const Eigen::MatrixXd x_50 = finite_horizon_proxy(loop, sigma, 50).x;
      worst_cov = std::max(
          worst_cov, (cov - x_50).norm() / x_50.norm() /
                         (4.0 / std::sqrt(static_cast<double>(n_rollouts))));
    }
    const double elapsed = seconds_since(start);
    reporter.report(11, "oracle equivalence (sum + MC covariance)",
                    worst_sum <= 1e-12 && worst_cov <= 1.0,
                    fmt("sum dev %.1e, cov dev %.2f of budget, %.0f s",
                        worst_sum, worst_cov, elapsed));
  }

  // 12. Byte-identical reproduction across runs and parallel widths.
  {
    StudyConfig study;
    study.seed = 42;
    study.parallel_width = 1;
    const std::string first = table1_csv(reproduce_table1(study)).to_string();
    study.parallel_width = 3;
    const std::string second =
        table1_csv(reproduce_table1(study)).to_string();
    reporter.report(12, "deterministic table reproduction", first == second,
                    fmt("%zu bytes, width 1 vs 3", first.size()));
  }

  if (reporter.failures == 0) {
    std::printf("all 12 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", reporter.failures);
  }
  return reporter.failures == 0 ? 0 : 1;
}
