#pragma once

#include "wavepalm/spectrum.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace wavepalm {

/// Malformed or incomplete configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses {hs, tp, gamma, sigma_a, sigma_b, omega_c, theta[, g]}. omega_c may be
/// null for an uncut spectrum. Throws ConfigError naming the offending key.
SpectrumConfig spectrum_config_from_json(const nlohmann::json& doc);
SpectrumConfig load_spectrum_config(const std::string& path);
nlohmann::json to_json(const SpectrumConfig& cfg);

}  // namespace wavepalm
