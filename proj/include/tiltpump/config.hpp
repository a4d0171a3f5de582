#pragma once

#include "tiltpump/params.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace tiltpump {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kConfigSchema = "tiltpump-config/1";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct EmitFlags {
  bool csv = true;
  bool json = true;
  bool svg = true;
};

/// Run configuration: experiment parameters and numerical controls, with a
/// versioned schema and strict unknown-key rejection. Controls are kept as
/// a JSON object; each experiment validates its own keys.
struct ExperimentConfig {
  ModelParams params;        // starts from the experiment's defaults
  bool params_overridden = false;
  nlohmann::json controls = nlohmann::json::object();
  std::filesystem::path out_dir = "out";
  EmitFlags emit;
  int threads = 0;   // 0 = hardware
  bool strict = false;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline void apply_params_overrides(ModelParams& p, const nlohmann::json& obj) {
  reject_unknown_keys(obj,
                      {"J", "delta0", "Delta0", "U", "omega", "tilt_p", "tilt_q", "phi0", "L_t", "boundary"},
                      "params");
  if (obj.contains("J")) p.J = obj["J"].get<double>();
  if (obj.contains("delta0")) p.delta0 = obj["delta0"].get<double>();
  if (obj.contains("Delta0")) p.Delta0 = obj["Delta0"].get<double>();
  if (obj.contains("U")) p.U = obj["U"].get<double>();
  if (obj.contains("omega")) p.omega = obj["omega"].get<double>();
  if (obj.contains("tilt_p")) p.tilt_p = obj["tilt_p"].get<int>();
  if (obj.contains("tilt_q")) p.tilt_q = obj["tilt_q"].get<int>();
  if (obj.contains("phi0")) p.phi0 = obj["phi0"].get<double>();
  if (obj.contains("L_t")) p.L_t = obj["L_t"].get<int>();
  if (obj.contains("boundary")) {
    const std::string b = obj["boundary"].get<std::string>();
    if (b == "periodic")
      p.boundary = Boundary::periodic;
    else if (b == "open")
      p.boundary = Boundary::open;
    else
      throw ConfigError("params.boundary must be 'periodic' or 'open'");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

/// Parses a config file on top of experiment defaults. Empty path = all
/// defaults.
inline ExperimentConfig load_config(const std::filesystem::path& path, const ModelParams& defaults) {
  ExperimentConfig cfg;
  cfg.params = defaults;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys(doc, {"schema", "params", "controls", "out_dir", "emit", "threads", "strict"},
                              "config");
  if (doc.contains("schema") && doc["schema"].get<std::string>() != kConfigSchema)
    throw ConfigError("unsupported config schema: expected " + std::string(kConfigSchema));
  if (doc.contains("params")) {
    detail::apply_params_overrides(cfg.params, doc["params"]);
    cfg.params_overridden = true;
  }
  if (doc.contains("controls")) {
    if (!doc["controls"].is_object()) throw ConfigError("controls must be an object");
    cfg.controls = doc["controls"];
  }
  if (doc.contains("out_dir")) cfg.out_dir = doc["out_dir"].get<std::string>();
  if (doc.contains("emit")) {
    detail::reject_unknown_keys(doc["emit"], {"csv", "json", "svg"}, "emit");
    if (doc["emit"].contains("csv")) cfg.emit.csv = doc["emit"]["csv"].get<bool>();
    if (doc["emit"].contains("json")) cfg.emit.json = doc["emit"]["json"].get<bool>();
    if (doc["emit"].contains("svg")) cfg.emit.svg = doc["emit"]["svg"].get<bool>();
  }
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (doc.contains("strict")) cfg.strict = doc["strict"].get<bool>();
  return cfg;
}

/// JSON echo of the fully resolved parameter set.
inline nlohmann::json params_to_json(const ModelParams& p) {
  return nlohmann::json{{"J", p.J},
                        {"delta0", p.delta0},
                        {"Delta0", p.Delta0},
                        {"U", p.U},
                        {"omega", p.omega},
                        {"tilt_p", p.tilt_p},
                        {"tilt_q", p.tilt_q},
                        {"phi0", p.phi0},
                        {"L_t", p.L_t},
                        {"boundary", p.boundary == Boundary::periodic ? "periodic" : "open"}};
}

}  // namespace tiltpump
