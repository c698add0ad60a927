#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gainbound/bounds.hpp"
#include "gainbound/canonical.hpp"
#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"
#include "gainbound/lyapunov.hpp"
#include "gainbound/montecarlo.hpp"
#include "gainbound/serialize.hpp"
#include "gainbound/version.hpp"

namespace gainbound {

/// Numeric regime index used in CSV payloads (CSV stays numeric-only);
/// JSON outputs carry the names.
inline int regime_index(Regime r) {
  switch (r) {
    case Regime::kCO: return 0;
    case Regime::kSO: return 1;
    case Regime::kCU: return 2;
    case Regime::kSU: return 3;
  }
  return -1;
}

/// Scalar canonical study configuration shared by the reproduction commands.
/// Defaults reproduce the published setup: unit mass at 50 Hz, quad
/// (50, 100) x (20, 40), unit Gaussian action error, 50k rollouts over 50
/// steps with tube radius 0.3.
struct StudyConfig {
  RegimeQuad quad{50.0, 100.0, 20.0, 40.0};
  double m = 1.0;
  double dt = 0.02;
  double sigma2 = 1.0;
  long n_rollouts = 50000;
  long horizon = 50;
  double radius = 0.3;
  std::uint64_t seed = 42;
  int parallel_width = 1;

  EnsembleConfig ensemble() const {
    return {n_rollouts, horizon, seed, parallel_width};
  }

  DiscreteClosedLoop loop(Regime r) const {
    return discretize_plant(PlantModel(m, dt), quad.gains(r));
  }

  // parallel_width is deliberately absent: it partitions work without
  // affecting any result, so configs differing only in width hash alike.
  json to_json() const {
    return json{{"alpha_l", quad.alpha_l}, {"alpha_h", quad.alpha_h},
                {"beta_l", quad.beta_l},   {"beta_h", quad.beta_h},
                {"m", m},                  {"dt", dt},
                {"sigma2", sigma2},        {"rollouts", n_rollouts},
                {"horizon", horizon},      {"radius", radius},
                {"seed", seed}};
  }
};

// ---------------------------------------------------------------------------
// Table I
// ---------------------------------------------------------------------------

struct Table1Row {
  Regime regime = Regime::kCO;
  double kp = 0.0, kd = 0.0;
  double rho = 0.0;
  double x_c = 0.0;
  double x_d = 0.0;
  double x_d_ratio = 0.0;
  double fail_hat = 0.0;
  double fail_ci = 0.0;
};

/// One row per regime: spectral radius, continuous and discrete stationary
/// proxies, discrete ratio against CO, and the Monte Carlo failure rate.
inline std::vector<Table1Row> reproduce_table1(const StudyConfig& config) {
  const Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Constant(1, 1, config.sigma2);
  const NoiseModel noise = NoiseModel::gaussian(sigma);

  std::vector<Table1Row> rows;
  double x_d_co = 0.0;
  for (Regime regime : kAllRegimes) {
    try {
      Table1Row row;
      row.regime = regime;
      row.kp = config.quad.alpha(regime);
      row.kd = config.quad.beta(regime);

      const DiscreteClosedLoop loop = config.loop(regime);
      row.rho = loop.spectral_radius;
      row.x_c = continuous_position_variance(row.kp, row.kd, config.sigma2);
      row.x_d = stationary_proxy(loop, sigma).x(0, 0);
      if (regime == Regime::kCO) x_d_co = row.x_d;
      row.x_d_ratio = row.x_d / x_d_co;

      const EnsembleStats stats = failure_rate(
          loop, noise, config.horizon, config.radius, config.ensemble());
      row.fail_hat = stats.failure_rate;
      row.fail_ci = stats.ci_halfwidth;
      rows.push_back(row);
    } catch (const std::exception& e) {
      throw SolverError(std::string("reproduce_table1[") +
                        regime_name(regime) + "]: " + e.what());
    }
  }
  return rows;
}

inline CsvTable table1_csv(const std::vector<Table1Row>& rows) {
  CsvTable table;
  table.columns = {"regime", "kp",        "kd",       "rho",     "x_c",
                   "x_d",    "x_d_ratio", "fail_hat", "fail_ci"};
  for (const auto& row : rows) {
    table.rows.push_back({static_cast<double>(regime_index(row.regime)),
                          row.kp, row.kd, row.rho, row.x_c, row.x_d,
                          row.x_d_ratio, row.fail_hat, row.fail_ci});
  }
  return table;
}

inline json table1_json(const std::vector<Table1Row>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    out.push_back(json{{"regime", regime_name(row.regime)},
                       {"kp", row.kp},
                       {"kd", row.kd},
                       {"rho", row.rho},
                       {"x_c", row.x_c},
                       {"x_d", row.x_d},
                       {"x_d_ratio", row.x_d_ratio},
                       {"fail_hat", row.fail_hat},
                       {"fail_ci", row.fail_ci}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure 2: percentile envelopes
// ---------------------------------------------------------------------------

struct EnvelopeStudy {
  Regime regime = Regime::kCO;
  EnsembleStats stats;  // envelopes at the requested levels + r95 overlay
};

inline std::vector<EnvelopeStudy> reproduce_envelopes(
    const StudyConfig& config,
    const std::vector<double>& levels = {50.0, 95.0, 99.0}) {
  const NoiseModel noise =
      NoiseModel::gaussian(Eigen::MatrixXd::Constant(1, 1, config.sigma2));
  std::vector<EnvelopeStudy> studies;
  for (Regime regime : kAllRegimes) {
    EnvelopeStudy study;
    study.regime = regime;
    study.stats = percentile_envelopes(config.loop(regime), noise,
                                       config.horizon, config.ensemble(),
                                       levels);
    studies.push_back(std::move(study));
  }
  return studies;
}

inline CsvTable envelopes_csv(const EnvelopeStudy& study) {
  CsvTable table;
  table.columns = {"t"};
  for (double level : study.stats.envelopes.levels) {
    std::string name = format_double(level);
    table.columns.push_back("p" + name);
  }
  table.columns.push_back("r95_theory");
  const auto& values = study.stats.envelopes.values;
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    std::vector<double> row{static_cast<double>(t)};
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      row.push_back(values(t, k));
    }
    row.push_back(study.stats.r95_theory);
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Figure 3: gain-grid heatmap
// ---------------------------------------------------------------------------

struct SweepSpec {
  double kp_min = 5.0, kp_max = 200.0;
  double kd_min = 5.0, kd_max = 200.0;
  int resolution = 50;
  bool log_spacing = true;  // Fig. 3 gives no axis rule; log is the default
  double m = 1.0;
  double dt = 0.02;
  double sigma2 = 1.0;

  void validate() const {
    if (resolution < 2) throw ConfigError("SweepSpec: resolution >= 2");
    if (!(kp_min > 0.0 && kd_min > 0.0 && kp_min < kp_max &&
          kd_min < kd_max)) {
      throw ConfigError("SweepSpec: need 0 < min < max on both axes");
    }
  }

  std::vector<double> kp_grid() const { return axis(kp_min, kp_max); }
  std::vector<double> kd_grid() const { return axis(kd_min, kd_max); }

 private:
  std::vector<double> axis(double lo, double hi) const {
    std::vector<double> grid(static_cast<size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
      const double f = static_cast<double>(i) /
                       static_cast<double>(resolution - 1);
      grid[static_cast<size_t>(i)] =
          log_spacing ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
    }
    return grid;
  }
};

struct SweepCell {
  double kp = 0.0, kd = 0.0;
  double x_inf_d = 0.0;
  double x_inf_normalized = 0.0;
  double log10_normalized = 0.0;
  bool stable = true;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // row-major over (kp index, kd index)
  std::array<SweepCell, 4> regime_cells;  // CO, SO, CU, SU exactly
  double x_co = 0.0;  // normalizer: stationary proxy at the CO gains
};

/// Stationary proxy over the gain grid, normalized by the CO regime value.
/// Cells that fail the stability margin are emitted with stable = false and
/// NaN payloads rather than dropped (cannot occur on an all-positive grid,
/// where the whole orthant is stable).
inline SweepResult sweep_heatmap(const SweepSpec& spec,
                                 const RegimeQuad& quad) {
  spec.validate();
  const PlantModel plant(spec.m, spec.dt);
  const Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(1, 1, spec.sigma2);

  auto evaluate = [&](double kp, double kd) {
    SweepCell cell;
    cell.kp = kp;
    cell.kd = kd;
    try {
      const DiscreteClosedLoop loop =
          discretize_plant(plant, GainSetting(kp, kd));
      cell.x_inf_d = stationary_proxy(loop, sigma).x(0, 0);
    } catch (const UnstableLoopError&) {
      cell.stable = false;
      cell.x_inf_d = std::numeric_limits<double>::quiet_NaN();
    }
    return cell;
  };

  SweepResult result;
  result.x_co = evaluate(quad.alpha_l, quad.beta_h).x_inf_d;

  auto normalize = [&](SweepCell cell) {
    if (cell.stable) {
      cell.x_inf_normalized = cell.x_inf_d / result.x_co;
      cell.log10_normalized = std::log10(cell.x_inf_normalized);
    } else {
      cell.x_inf_normalized = std::numeric_limits<double>::quiet_NaN();
      cell.log10_normalized = std::numeric_limits<double>::quiet_NaN();
    }
    return cell;
  };

  const auto kps = spec.kp_grid();
  const auto kds = spec.kd_grid();
  result.cells.reserve(kps.size() * kds.size());
  for (double kp : kps) {
    for (double kd : kds) {
      result.cells.push_back(normalize(evaluate(kp, kd)));
    }
  }
  for (size_t i = 0; i < kAllRegimes.size(); ++i) {
    const Regime regime = kAllRegimes[i];
    result.regime_cells[i] =
        normalize(evaluate(quad.alpha(regime), quad.beta(regime)));
  }
  return result;
}

inline CsvTable sweep_csv(const SweepResult& result) {
  CsvTable table;
  table.columns = {"kp", "kd", "x_inf_d", "x_inf_normalized",
                   "log10_normalized", "stable"};
  for (const auto& cell : result.cells) {
    table.rows.push_back({cell.kp, cell.kd, cell.x_inf_d,
                          cell.x_inf_normalized, cell.log10_normalized,
                          cell.stable ? 1.0 : 0.0});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Figure 4: empirical failure rate vs the Theorem-2 bound over the radius
// ---------------------------------------------------------------------------

struct FailureCurvePoint {
  double r = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
};

struct FailureCurve {
  Regime regime = Regime::kCO;
  double gamma = 0.0;  // Gamma_T entering the bound
  std::vector<FailureCurvePoint> points;
};

/// Shares one ensemble per regime across the whole radius grid, and pairs
/// each empirical rate with min(1, 2(T+1) exp(-r^2 / (2 Gamma_T l_roll))).
inline std::vector<FailureCurve> failure_curve(
    const StudyConfig& config, const std::vector<double>& r_grid,
    double l_roll = 1.0) {
  const NoiseModel noise =
      NoiseModel::gaussian(Eigen::MatrixXd::Constant(1, 1, config.sigma2));
  std::vector<FailureCurve> curves;
  for (Regime regime : kAllRegimes) {
    const DiscreteClosedLoop loop = config.loop(regime);
    const EnsembleStats stats =
        simulate_ensemble(loop, noise, config.ensemble(),
                          std::numeric_limits<double>::infinity(), {});
    FailureCurve curve;
    curve.regime = regime;
    curve.gamma = amplification_index(loop, config.horizon).gamma;
    for (double r : r_grid) {
      FailureCurvePoint point;
      point.r = r;
      long hits = 0;
      for (double peak : stats.rollout_peak_norms) {
        if (peak >= r) ++hits;
      }
      point.empirical = static_cast<double>(hits) /
                        static_cast<double>(config.n_rollouts);
      FailureBoundQuery query;
      query.r = r;
      query.t_horizon = config.horizon;
      query.l_va = l_roll;
      query.eps_gen = 0.0;
      query.n = 1;
      point.bound = failure_bound(query, curve.gamma).bound;
      curve.points.push_back(point);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

inline CsvTable failure_curve_csv(const std::vector<FailureCurve>& curves) {
  CsvTable table;
  table.columns = {"regime", "r", "empirical", "bound"};
  for (const auto& curve : curves) {
    for (const auto& point : curve.points) {
      table.rows.push_back({static_cast<double>(regime_index(curve.regime)),
                            point.r, point.empirical, point.bound});
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// ZOH inheritance: X_inf^d / dt -> X_inf^c as dt -> 0
// ---------------------------------------------------------------------------

struct InheritanceRecord {
  double dt = 0.0;
  double x_d = 0.0;
  double x_d_over_dt = 0.0;
  double x_c = 0.0;
  double rel_error = 0.0;
};

inline std::vector<InheritanceRecord> zoh_inheritance_study(
    double alpha, double beta, double m, const std::vector<double>& dts,
    double sigma2 = 1.0) {
  if (dts.empty()) {
    throw ConfigError("zoh_inheritance_study: need at least one dt");
  }
  const double x_c = continuous_position_variance(alpha, beta, sigma2);
  const Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(1, 1, sigma2);
  std::vector<InheritanceRecord> records;
  for (double dt : dts) {
    const DiscreteClosedLoop loop =
        discretize_plant(PlantModel(m, dt), GainSetting(alpha, beta));
    InheritanceRecord record;
    record.dt = dt;
    record.x_d = stationary_proxy(loop, sigma).x(0, 0);
    record.x_d_over_dt = record.x_d / dt;
    record.x_c = x_c;
    record.rel_error = std::abs(record.x_d_over_dt - x_c) / x_c;
    records.push_back(record);
  }
  return records;
}

inline CsvTable inheritance_csv(Regime regime,
                                const std::vector<InheritanceRecord>& records) {
  CsvTable table;
  table.columns = {"regime", "dt", "x_d", "x_d_over_dt", "x_c", "rel_error"};
  for (const auto& record : records) {
    table.rows.push_back({static_cast<double>(regime_index(regime)),
                          record.dt, record.x_d, record.x_d_over_dt,
                          record.x_c, record.rel_error});
  }
  return table;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("loglog_slope: need two or more points");
  }
  const auto n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Provenance manifest
// ---------------------------------------------------------------------------

inline json make_manifest(const std::string& command, const json& config,
                          std::uint64_t seed,
                          const std::vector<std::string>& outputs) {
  return json{{"tool", "gainbound"},
              {"version", kVersion},
              {"command", command},
              {"seed", seed},
              {"config_hash", config_hash(config)},
              {"config", config},
              {"outputs", outputs}};
}

}  // namespace gainbound
