#pragma once

#include <optional>
#include <string>

#include "gainbound/bounds.hpp"
#include "gainbound/canonical.hpp"
#include "gainbound/dynamics.hpp"
#include "gainbound/experiments.hpp"
#include "gainbound/montecarlo.hpp"
#include "gainbound/rng.hpp"
#include "gainbound/serialize.hpp"

namespace gainbound {

/// Gain specification modes for a run config; exactly one may be present.
struct GainsSpec {
  std::optional<GainSetting> single;
  std::optional<RegimeQuad> quad;
  std::optional<SweepSpec> grid;

  int modes() const {
    return (single ? 1 : 0) + (quad ? 1 : 0) + (grid ? 1 : 0);
  }
};

/// Parsed run configuration: plant, one gain mode, noise, Monte Carlo
/// settings, an optional bound query and the output directory.
struct RunConfig {
  std::optional<PlantModel> plant;
  GainsSpec gains;
  std::optional<NoiseModel> noise;
  EnsembleConfig mc{50000, 50, 42, 1};
  std::optional<FailureBoundQuery> query;
  std::string output_dir;
  json raw;  // canonical form, feeds config_hash
};

namespace detail {

inline double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline double number_or(const json& parent, const char* key,
                        double fallback, const std::string& path) {
  if (!parent.contains(key)) return fallback;
  return require_number(parent.at(key), path + "." + key);
}

}  // namespace detail

inline PlantModel parse_plant(const json& j) {
  if (!j.is_object()) throw ConfigError("plant: expected an object");
  if (!j.contains("dt")) throw ConfigError("plant.dt: missing");
  const double dt = detail::require_number(j.at("dt"), "plant.dt");
  if (!j.contains("m")) throw ConfigError("plant.m: missing");
  const json& m = j.at("m");
  try {
    if (m.is_number()) return PlantModel(m.get<double>(), dt);
    const Eigen::MatrixXd parsed = matrix_from_json(m, "plant.m");
    if (parsed.cols() == 1 && parsed.rows() > 1) {
      // Diagonal shorthand: a vector of per-joint masses.
      return PlantModel(Eigen::MatrixXd(parsed.col(0).asDiagonal()), dt);
    }
    if (parsed.cols() == 1) return PlantModel(parsed(0, 0), dt);
    return PlantModel(parsed, dt);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("plant.m: ") + e.what());
  }
}

inline GainsSpec parse_gains(const json& j) {
  GainsSpec spec;
  if (!j.is_object()) throw ConfigError("gains: expected an object");
  if (j.contains("kp") || j.contains("kd")) {
    if (!j.contains("kp") || !j.contains("kd")) {
      throw ConfigError("gains: kp and kd must be given together");
    }
    const json& kp = j.at("kp");
    const json& kd = j.at("kd");
    auto as_vector = [](const json& v, const char* path) {
      if (v.is_number()) {
        return Eigen::VectorXd(Eigen::VectorXd::Constant(1, v.get<double>()));
      }
      return vector_from_json(v, path);
    };
    spec.single = GainSetting(as_vector(kp, "gains.kp"),
                              as_vector(kd, "gains.kd"));
  }
  if (j.contains("quad")) {
    const json& q = j.at("quad");
    spec.quad = RegimeQuad(
        detail::require_number(q.at("alpha_l"), "gains.quad.alpha_l"),
        detail::require_number(q.at("alpha_h"), "gains.quad.alpha_h"),
        detail::require_number(q.at("beta_l"), "gains.quad.beta_l"),
        detail::require_number(q.at("beta_h"), "gains.quad.beta_h"));
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    SweepSpec grid;
    grid.kp_min = detail::number_or(g, "kp_min", grid.kp_min, "gains.grid");
    grid.kp_max = detail::number_or(g, "kp_max", grid.kp_max, "gains.grid");
    grid.kd_min = detail::number_or(g, "kd_min", grid.kd_min, "gains.grid");
    grid.kd_max = detail::number_or(g, "kd_max", grid.kd_max, "gains.grid");
    grid.resolution = static_cast<int>(
        detail::number_or(g, "resolution", grid.resolution, "gains.grid"));
    if (g.contains("log_spacing")) {
      if (!g.at("log_spacing").is_boolean()) {
        throw ConfigError("gains.grid.log_spacing: expected a boolean");
      }
      grid.log_spacing = g.at("log_spacing").get<bool>();
    }
    grid.validate();
    spec.grid = grid;
  }
  if (spec.modes() != 1) {
    throw ConfigError(
        "gains: exactly one of {kp/kd, quad, grid} must be specified");
  }
  return spec;
}

inline NoiseModel parse_noise(const json& j) {
  if (!j.is_object()) throw ConfigError("noise: expected an object");
  const std::string kind =
      j.contains("kind") ? j.at("kind").get<std::string>() : "gaussian";
  if (kind == "gaussian") {
    if (!j.contains("sigma_roll")) {
      throw ConfigError("noise.sigma_roll: missing for gaussian noise");
    }
    const json& s = j.at("sigma_roll");
    if (s.is_number()) return NoiseModel::gaussian(s.get<double>());
    Eigen::MatrixXd parsed = matrix_from_json(s, "noise.sigma_roll");
    if (parsed.cols() == 1 && parsed.rows() > 1) {
      parsed = Eigen::MatrixXd(parsed.col(0).asDiagonal());
    }
    return NoiseModel::gaussian(parsed);
  }
  if (kind == "bounded_uniform" || kind == "rademacher_scaled") {
    if (!j.contains("scale")) {
      throw ConfigError("noise.scale: missing for " + kind);
    }
    const json& s = j.at("scale");
    const Eigen::VectorXd scale =
        s.is_number() ? Eigen::VectorXd::Constant(1, s.get<double>())
                      : vector_from_json(s, "noise.scale");
    return kind == "bounded_uniform" ? NoiseModel::bounded_uniform(scale)
                                     : NoiseModel::rademacher_scaled(scale);
  }
  throw ConfigError("noise.kind: unknown kind '" + kind +
                    "' (gaussian | bounded_uniform | rademacher_scaled)");
}

inline EnsembleConfig parse_mc(const json& j) {
  EnsembleConfig mc{50000, 50, 42, 1};
  if (!j.is_object()) throw ConfigError("mc: expected an object");
  mc.n_rollouts = static_cast<long>(
      detail::number_or(j, "rollouts", static_cast<double>(mc.n_rollouts),
                        "mc"));
  mc.horizon = static_cast<long>(
      detail::number_or(j, "horizon", static_cast<double>(mc.horizon), "mc"));
  mc.seed = static_cast<std::uint64_t>(
      detail::number_or(j, "seed", static_cast<double>(mc.seed), "mc"));
  mc.parallel_width = static_cast<int>(
      detail::number_or(j, "parallel_width",
                        static_cast<double>(mc.parallel_width), "mc"));
  mc.validate();
  return mc;
}

inline FailureBoundQuery parse_query(const json& j) {
  if (!j.is_object()) throw ConfigError("query: expected an object");
  FailureBoundQuery query;
  query.r = detail::number_or(j, "r", 0.3, "query");
  query.t_horizon = static_cast<long>(
      detail::number_or(j, "t_horizon", 50.0, "query"));
  query.l_va = detail::number_or(j, "l_va", 1.0, "query");
  query.eps_gen = detail::number_or(j, "eps_gen", 0.0, "query");
  query.n = static_cast<long>(detail::number_or(j, "n", 1.0, "query"));
  query.validate();
  return query;
}

inline RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig config;
  config.raw = j;
  if (j.contains("plant")) config.plant = parse_plant(j.at("plant"));
  if (j.contains("gains")) config.gains = parse_gains(j.at("gains"));
  if (j.contains("noise")) config.noise = parse_noise(j.at("noise"));
  if (j.contains("mc")) config.mc = parse_mc(j.at("mc"));
  if (j.contains("query")) config.query = parse_query(j.at("query"));
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) {
      throw ConfigError("output_dir: expected a string");
    }
    config.output_dir = j.at("output_dir").get<std::string>();
  }
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  json parsed;
  try {
    parsed = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return parse_run_config(parsed);
}

}  // namespace gainbound
