// gainbound command-line tool: discretization, Lyapunov proxies, failure
// bounds, Monte Carlo ensembles and one-command reproduction studies.
//
// Exit codes: 0 success, 1 config error, 2 numerical failure, 64 usage.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gainbound/gainbound.hpp"

namespace {

using namespace gainbound;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUsage = 64;

std::string default_output_dir() {
  if (const char* env = std::getenv("GAINBOUND_OUT")) return env;
  return ".";
}

// Shared system inputs: an optional config file plus flag overrides
// (flags win over file values).
struct SystemFlags {
  std::string config_path;
  std::vector<double> kp, kd, mass;
  double dt = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--kp", kp, "stiffness per joint")->delimiter(',');
    cmd->add_option("--kd", kd, "damping per joint")->delimiter(',');
    cmd->add_option("--m", mass, "mass diagonal (or scalar)")->delimiter(',');
    cmd->add_option("--dt", dt, "control period, seconds");
  }

  std::optional<RunConfig> load() const {
    if (config_path.empty()) return std::nullopt;
    return load_run_config(config_path);
  }

  static Eigen::VectorXd to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
  }

  std::pair<PlantModel, GainSetting> resolve(
      const std::optional<RunConfig>& config) const {
    Eigen::VectorXd kp_vec, kd_vec;
    if (!kp.empty() || !kd.empty()) {
      if (kp.empty() || kd.empty()) {
        throw ConfigError("--kp and --kd must be given together");
      }
      kp_vec = to_vector(kp);
      kd_vec = to_vector(kd);
    } else if (config && config->gains.single) {
      kp_vec = config->gains.single->kp;
      kd_vec = config->gains.single->kd;
    } else {
      throw ConfigError("gains missing: pass --kp/--kd or a config file "
                        "with gains.kp/gains.kd");
    }
    GainSetting gains(kp_vec, kd_vec);

    double period = dt;
    if (period <= 0.0) {
      if (config && config->plant) {
        period = config->plant->dt;
      } else {
        throw ConfigError("--dt missing (or provide plant.dt in the config)");
      }
    }

    Eigen::MatrixXd mass_matrix;
    if (!mass.empty()) {
      if (mass.size() == 1) {
        mass_matrix = Eigen::MatrixXd::Constant(1, 1, mass[0]);
        if (gains.joints() > 1) {
          mass_matrix = Eigen::MatrixXd(
              Eigen::VectorXd::Constant(gains.joints(), mass[0])
                  .asDiagonal());
        }
      } else {
        mass_matrix = Eigen::MatrixXd(to_vector(mass).asDiagonal());
      }
    } else if (config && config->plant) {
      mass_matrix = config->plant->mass;
    } else {
      throw ConfigError("--m missing (or provide plant.m in the config)");
    }
    return {PlantModel(mass_matrix, period), gains};
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(out_path, text);
  }
}

// ---------------------------------------------------------------------------
// discretize
// ---------------------------------------------------------------------------

struct DiscretizeCmd {
  SystemFlags system;
  bool emit_json = false;
  std::string out_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "discretize", "exact ZOH closed loop for a plant and gain setting");
    system.attach(cmd);
    cmd->add_flag("--emit-json", emit_json,
                  "emit matrices as row-major JSON arrays (default)");
    cmd->add_option("--out", out_path, "write JSON here instead of stdout");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto config = system.load();
    const auto [plant, gains] = system.resolve(config);
    const auto sys = build_error_dynamics(plant, gains);
    const auto loop = zoh_discretize(sys, plant.dt);
    json out{{"a_c", matrix_to_json(sys.a_c)},
             {"b_c", matrix_to_json(sys.b_c)},
             {"a", matrix_to_json(loop.a)},
             {"b", matrix_to_json(loop.b)},
             {"c", matrix_to_json(loop.c)},
             {"spectral_radius", loop.spectral_radius},
             {"dt", loop.dt}};
    emit(out.dump(2), out_path);
  }
};

// ---------------------------------------------------------------------------
// lyapunov
// ---------------------------------------------------------------------------

struct LyapunovCmd {
  SystemFlags system;
  double sigma2 = 1.0;
  long horizon = 0;  // 0 = stationary
  std::string out_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "lyapunov", "proxy matrix S and position projection X = C S C^T");
    system.attach(cmd);
    cmd->add_option("--sigma2", sigma2, "isotropic noise proxy scale");
    cmd->add_option("--horizon", horizon,
                    "finite horizon t; omit or 0 for the stationary S_inf");
    cmd->add_option("--out", out_path, "write JSON here instead of stdout");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto config = system.load();
    const auto [plant, gains] = system.resolve(config);
    const auto loop = discretize_plant(plant, gains);
    Eigen::MatrixXd sigma =
        sigma2 * Eigen::MatrixXd::Identity(loop.joints(), loop.joints());
    if (config && config->noise) sigma = config->noise->sigma_roll;

    const ProxyResult proxy = horizon > 0
                                  ? finite_horizon_proxy(loop, sigma, horizon)
                                  : stationary_proxy(loop, sigma);
    json out{{"s", matrix_to_json(proxy.s)},
             {"x", matrix_to_json(proxy.x)},
             {"horizon", proxy.horizon ? json(*proxy.horizon) : json()},
             {"residual", proxy.residual},
             {"spectral_radius", loop.spectral_radius}};
    emit(out.dump(2), out_path);
  }
};

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

struct BoundCmd {
  SystemFlags system;
  double r = 0.3;
  long t_horizon = 50;
  long n = 1;
  double l_va = 1.0;
  double eps_gen = 0.0;
  double gamma = -1.0;  // <0 = compute from the system flags
  std::string out_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "bound", "failure bound from validation loss and amplification");
    system.attach(cmd);
    cmd->add_option("--r", r, "success-tube radius")->required();
    cmd->add_option("--T", t_horizon, "horizon in steps");
    cmd->add_option("--n", n, "joint count entering the bound");
    cmd->add_option("--lva", l_va, "empirical validation loss");
    cmd->add_option("--eps", eps_gen, "generalization slack");
    cmd->add_option("--gamma", gamma,
                    "amplification index (computed from the system if "
                    "omitted)");
    cmd->add_option("--out", out_path, "write JSON here instead of stdout");
    cmd->callback([this] { run(); });
  }

  void run() const {
    double gamma_value = gamma;
    if (gamma_value < 0.0) {
      const auto config = system.load();
      const auto [plant, gains] = system.resolve(config);
      const auto loop = discretize_plant(plant, gains);
      gamma_value = amplification_index(loop, t_horizon).gamma;
    }
    FailureBoundQuery query;
    query.r = r;
    query.t_horizon = t_horizon;
    query.l_va = l_va;
    query.eps_gen = eps_gen;
    query.n = n;
    const FailureBound result = failure_bound(query, gamma_value);
    json out{{"gamma", gamma_value},
             {"exponent", result.exponent},
             {"bound_raw", result.raw},
             {"bound_clipped", result.bound}};
    emit(out.dump(2), out_path);
  }
};

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateCmd {
  SystemFlags system;
  std::string noise_kind;
  double sigma2 = -1.0;
  std::vector<double> noise_scale;
  long rollouts = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double radius = -1.0;
  std::vector<double> percentiles;
  int width = 0;
  std::string out_dir;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "simulate", "seeded Monte Carlo ensemble: envelopes and failure rate");
    system.attach(cmd);
    cmd->add_option("--noise-kind", noise_kind,
                    "gaussian | bounded_uniform | rademacher_scaled");
    cmd->add_option("--sigma2", sigma2, "gaussian noise variance");
    cmd->add_option("--scale", noise_scale,
                    "per-joint scale for the bounded/rademacher kinds")
        ->delimiter(',');
    cmd->add_option("--rollouts", rollouts, "ensemble size N");
    cmd->add_option("--horizon", horizon, "rollout length T");
    cmd->add_option("--seed", seed, "master seed")
        ->each([this](const std::string&) { seed_set = true; });
    cmd->add_option("--radius", radius, "success-tube radius");
    cmd->add_option("--percentiles", percentiles, "envelope levels")
        ->delimiter(',');
    cmd->add_option("--width", width, "parallel width (does not affect "
                                      "results)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto config = system.load();
    const auto [plant, gains] = system.resolve(config);
    const auto loop = discretize_plant(plant, gains);

    NoiseModel noise = NoiseModel::gaussian(
        Eigen::MatrixXd::Identity(loop.joints(), loop.joints()));
    if (config && config->noise) noise = *config->noise;
    if (!noise_kind.empty() || sigma2 >= 0.0 || !noise_scale.empty()) {
      const std::string kind = !noise_kind.empty()
                                   ? noise_kind
                                   : (config && config->noise
                                          ? noise_kind_name(config->noise->kind)
                                          : "gaussian");
      if (kind == "gaussian") {
        const double variance = sigma2 >= 0.0 ? sigma2 : 1.0;
        noise = NoiseModel::gaussian(
            variance *
            Eigen::MatrixXd::Identity(loop.joints(), loop.joints()));
      } else if (kind == "bounded_uniform" || kind == "rademacher_scaled") {
        if (noise_scale.empty()) {
          throw ConfigError("--scale required for noise kind " + kind);
        }
        const Eigen::VectorXd a = SystemFlags::to_vector(noise_scale);
        noise = kind == "bounded_uniform" ? NoiseModel::bounded_uniform(a)
                                          : NoiseModel::rademacher_scaled(a);
      } else {
        throw ConfigError("unknown noise kind '" + kind + "'");
      }
    }

    EnsembleConfig mc = config ? config->mc : EnsembleConfig{50000, 50, 42, 1};
    if (rollouts > 0) mc.n_rollouts = rollouts;
    if (horizon > 0) mc.horizon = horizon;
    if (seed_set) mc.seed = seed;
    if (width > 0) mc.parallel_width = width;

    double tube = radius;
    if (tube < 0.0) {
      tube = (config && config->query) ? config->query->r : 0.3;
    }
    std::vector<double> levels = percentiles;
    if (levels.empty()) levels = {50.0, 95.0, 99.0};

    const EnsembleStats stats =
        simulate_ensemble(loop, noise, mc, tube, levels);

    std::string dir = out_dir;
    if (dir.empty()) {
      dir = (config && !config->output_dir.empty()) ? config->output_dir
                                                    : default_output_dir();
    }
    const std::filesystem::path base(dir);

    EnvelopeStudy study;
    study.stats = stats;
    write_text_file(base / "envelopes.csv", envelopes_csv(study).to_string());

    const json effective{{"kp", matrix_to_json(gains.kp)},
                         {"kd", matrix_to_json(gains.kd)},
                         {"m", matrix_to_json(plant.mass)},
                         {"dt", plant.dt},
                         {"noise", noise_kind_name(noise.kind)},
                         {"sigma_roll", matrix_to_json(noise.sigma_roll)},
                         {"rollouts", mc.n_rollouts},
                         {"horizon", mc.horizon},
                         {"seed", mc.seed},
                         {"radius", tube}};
    const json stats_json{{"failure_rate", stats.failure_rate},
                          {"ci_halfwidth", stats.ci_halfwidth},
                          {"max_abs_error", stats.max_abs_error},
                          {"r95_theory", stats.r95_theory},
                          {"radius", tube},
                          {"seed", mc.seed},
                          {"config_hash", config_hash(effective)},
                          {"version", kVersion}};
    write_text_file(base / "stats.json", stats_json.dump(2) + "\n");
    std::cout << stats_json.dump(2) << '\n';
  }
};

// ---------------------------------------------------------------------------
// regimes
// ---------------------------------------------------------------------------

struct RegimesCmd {
  std::vector<double> alpha{50.0, 100.0};
  std::vector<double> beta{20.0, 40.0};
  double m = 1.0;
  double dt = 0.02;
  double sigma2 = 1.0;
  std::string csv_path, json_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "regimes", "canonical CO/SO/CU/SU table (deterministic columns)");
    cmd->add_option("--alpha", alpha, "stiffness levels: low,high")
        ->delimiter(',');
    cmd->add_option("--beta", beta, "damping levels: low,high")
        ->delimiter(',');
    cmd->add_option("--m", m, "mass");
    cmd->add_option("--dt", dt, "control period");
    cmd->add_option("--sigma2", sigma2, "noise proxy scale");
    cmd->add_option("--csv", csv_path, "write CSV here (default stdout)");
    cmd->add_option("--json", json_path, "also write JSON here");
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (alpha.size() != 2 || beta.size() != 2) {
      throw ConfigError("--alpha and --beta each need exactly two levels");
    }
    const RegimeQuad quad(std::min(alpha[0], alpha[1]),
                          std::max(alpha[0], alpha[1]),
                          std::min(beta[0], beta[1]),
                          std::max(beta[0], beta[1]));
    const PlantModel plant(m, dt);
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(1, 1, sigma2);

    CsvTable table;
    table.columns = {"regime", "kp", "kd", "rho", "x_c", "x_d", "x_d_ratio"};
    json rows = json::array();
    double x_d_co = 0.0;
    for (Regime regime : kAllRegimes) {
      const double kp = quad.alpha(regime);
      const double kd = quad.beta(regime);
      const auto loop = discretize_plant(plant, GainSetting(kp, kd));
      const double x_c = continuous_position_variance(kp, kd, sigma2);
      const double x_d = stationary_proxy(loop, sigma).x(0, 0);
      if (regime == Regime::kCO) x_d_co = x_d;
      table.rows.push_back({static_cast<double>(regime_index(regime)), kp, kd,
                            loop.spectral_radius, x_c, x_d, x_d / x_d_co});
      rows.push_back(json{{"regime", regime_name(regime)},
                          {"kp", kp},
                          {"kd", kd},
                          {"rho", loop.spectral_radius},
                          {"x_c", x_c},
                          {"x_d", x_d},
                          {"x_d_ratio", x_d / x_d_co}});
    }
    emit(table.to_string(), csv_path);
    if (!json_path.empty()) write_text_file(json_path, rows.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepCmd {
  SweepSpec spec;
  bool linear = false;
  std::vector<double> alpha{50.0, 100.0};
  std::vector<double> beta{20.0, 40.0};
  std::string out_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "sweep", "stationary proxy over a gain grid, normalized by CO");
    cmd->add_option("--kp-min", spec.kp_min, "grid lower bound for kp");
    cmd->add_option("--kp-max", spec.kp_max, "grid upper bound for kp");
    cmd->add_option("--kd-min", spec.kd_min, "grid lower bound for kd");
    cmd->add_option("--kd-max", spec.kd_max, "grid upper bound for kd");
    cmd->add_option("--resolution", spec.resolution, "cells per axis");
    cmd->add_flag("--linear", linear, "linear axis spacing (default log)");
    cmd->add_option("--m", spec.m, "mass");
    cmd->add_option("--dt", spec.dt, "control period");
    cmd->add_option("--sigma2", spec.sigma2, "noise proxy scale");
    cmd->add_option("--alpha", alpha, "quad stiffness levels: low,high")
        ->delimiter(',');
    cmd->add_option("--beta", beta, "quad damping levels: low,high")
        ->delimiter(',');
    cmd->add_option("--out", out_path, "write CSV here (default stdout)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (alpha.size() != 2 || beta.size() != 2) {
      throw ConfigError("--alpha and --beta each need exactly two levels");
    }
    SweepSpec effective = spec;
    effective.log_spacing = !linear;
    const RegimeQuad quad(std::min(alpha[0], alpha[1]),
                          std::max(alpha[0], alpha[1]),
                          std::min(beta[0], beta[1]),
                          std::max(beta[0], beta[1]));
    const SweepResult result = sweep_heatmap(effective, quad);
    emit(sweep_csv(result).to_string(), out_path);
  }
};

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct ReproduceCmd {
  std::string target;
  std::string out_dir;
  StudyConfig study;
  std::vector<double> alpha{50.0, 100.0};
  std::vector<double> beta{20.0, 40.0};

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "reproduce",
        "one-command studies: table1 | fig2 | fig3 | fig4 | inheritance");
    cmd->add_option("target", target, "what to reproduce")
        ->required()
        ->check(CLI::IsMember({"table1", "fig2", "fig3", "fig4",
                               "inheritance"}));
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--alpha", alpha, "quad stiffness levels: low,high")
        ->delimiter(',');
    cmd->add_option("--beta", beta, "quad damping levels: low,high")
        ->delimiter(',');
    cmd->add_option("--m", study.m, "mass");
    cmd->add_option("--dt", study.dt, "control period");
    cmd->add_option("--sigma2", study.sigma2, "noise variance");
    cmd->add_option("--rollouts", study.n_rollouts, "ensemble size");
    cmd->add_option("--horizon", study.horizon, "rollout length");
    cmd->add_option("--radius", study.radius, "success-tube radius");
    cmd->add_option("--seed", study.seed, "master seed");
    cmd->add_option("--width", study.parallel_width, "parallel width");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (alpha.size() != 2 || beta.size() != 2) {
      throw ConfigError("--alpha and --beta each need exactly two levels");
    }
    study.quad = RegimeQuad(std::min(alpha[0], alpha[1]),
                            std::max(alpha[0], alpha[1]),
                            std::min(beta[0], beta[1]),
                            std::max(beta[0], beta[1]));
    const std::filesystem::path base(
        out_dir.empty() ? default_output_dir() : out_dir);
    std::vector<std::string> outputs;

    if (target == "table1") {
      const auto rows = reproduce_table1(study);
      write_text_file(base / "table1.csv", table1_csv(rows).to_string());
      write_text_file(base / "table1.json", table1_json(rows).dump(2) + "\n");
      outputs = {"table1.csv", "table1.json"};
    } else if (target == "fig2") {
      for (const auto& envelope : reproduce_envelopes(study)) {
        std::string name = "fig2_";
        name += regime_name(envelope.regime);
        for (auto& ch : name) ch = static_cast<char>(std::tolower(ch));
        name += ".csv";
        write_text_file(base / name, envelopes_csv(envelope).to_string());
        outputs.push_back(name);
      }
    } else if (target == "fig3") {
      SweepSpec spec;
      spec.m = study.m;
      spec.dt = study.dt;
      spec.sigma2 = study.sigma2;
      const SweepResult result = sweep_heatmap(spec, study.quad);
      write_text_file(base / "fig3_sweep.csv",
                      sweep_csv(result).to_string());
      CsvTable regime_table;
      regime_table.columns = {"regime", "kp", "kd", "x_inf_d",
                              "x_inf_normalized", "log10_normalized",
                              "stable"};
      for (size_t i = 0; i < result.regime_cells.size(); ++i) {
        const SweepCell& cell = result.regime_cells[i];
        regime_table.rows.push_back(
            {static_cast<double>(i), cell.kp, cell.kd, cell.x_inf_d,
             cell.x_inf_normalized, cell.log10_normalized,
             cell.stable ? 1.0 : 0.0});
      }
      write_text_file(base / "fig3_regimes.csv", regime_table.to_string());
      outputs = {"fig3_sweep.csv", "fig3_regimes.csv"};
    } else if (target == "fig4") {
      std::vector<double> r_grid;
      for (int i = 1; i <= 10; ++i) r_grid.push_back(0.1 * i);
      const auto curves = failure_curve(study, r_grid);
      write_text_file(base / "fig4.csv",
                      failure_curve_csv(curves).to_string());
      json gammas = json::object();
      for (const auto& curve : curves) {
        gammas[regime_name(curve.regime)] = curve.gamma;
      }
      write_text_file(base / "fig4_gamma.json", gammas.dump(2) + "\n");
      outputs = {"fig4.csv", "fig4_gamma.json"};
    } else if (target == "inheritance") {
      const std::vector<double> dts{0.02, 0.01, 0.005, 0.0025};
      CsvTable table;
      for (Regime regime : kAllRegimes) {
        const auto records = zoh_inheritance_study(
            study.quad.alpha(regime), study.quad.beta(regime), study.m, dts,
            study.sigma2);
        const CsvTable part = inheritance_csv(regime, records);
        if (table.columns.empty()) table.columns = part.columns;
        table.rows.insert(table.rows.end(), part.rows.begin(),
                          part.rows.end());
      }
      write_text_file(base / "inheritance.csv", table.to_string());
      outputs = {"inheritance.csv"};
    }

    const json manifest = make_manifest("reproduce " + target,
                                        study.to_json(), study.seed, outputs);
    write_text_file(base / (target + "_manifest.json"),
                    manifest.dump(2) + "\n");
    std::cout << "wrote " << outputs.size() + 1 << " files to "
              << base.string() << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gain-dependent error propagation toolkit"};
  app.require_subcommand(1);

  DiscretizeCmd discretize;
  LyapunovCmd lyapunov;
  BoundCmd bound;
  SimulateCmd simulate;
  RegimesCmd regimes;
  SweepCmd sweep;
  ReproduceCmd reproduce;

  discretize.attach(app);
  lyapunov.attach(app);
  bound.attach(app);
  simulate.attach(app);
  regimes.attach(app);
  sweep.attach(app);
  reproduce.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const gainbound::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gainbound::UnstableLoopError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const gainbound::SolverError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
