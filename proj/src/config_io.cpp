#include "wavepalm/config_io.hpp"

#include <fstream>
#include <limits>

namespace wavepalm {

SpectrumConfig spectrum_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("spectrum config must be a JSON object");
  auto number = [&](const char* key) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    const auto& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  };

  SpectrumConfig cfg;
  cfg.hs = number("hs");
  cfg.tp = number("tp");
  cfg.gamma = number("gamma");
  cfg.sigma_a = number("sigma_a");
  cfg.sigma_b = number("sigma_b");
  if (!doc.contains("omega_c")) throw ConfigError("missing field 'omega_c'");
  cfg.omega_c = doc.at("omega_c").is_null() ? std::numeric_limits<double>::infinity() : number("omega_c");
  cfg.theta = number("theta");
  if (doc.contains("g")) cfg.g = number("g");
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SpectrumConfig load_spectrum_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return spectrum_config_from_json(doc);
}

nlohmann::json to_json(const SpectrumConfig& cfg) {
  nlohmann::json j;
  j["hs"] = cfg.hs;
  j["tp"] = cfg.tp;
  j["gamma"] = cfg.gamma;
  j["sigma_a"] = cfg.sigma_a;
  j["sigma_b"] = cfg.sigma_b;
  j["omega_c"] = cfg.has_cutoff() ? nlohmann::json(cfg.omega_c) : nlohmann::json(nullptr);
  j["theta"] = cfg.theta;
  j["g"] = cfg.g;
  return j;
}

}  // namespace wavepalm
