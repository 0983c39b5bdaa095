#pragma once

#include <string>

#include "epifilter/kdpf.hpp"
#include "epifilter/observation.hpp"
#include "epifilter/priors.hpp"

namespace epifilter {

// The full run configuration.  Defaults are the shipped Guinea setup:
// elicited priors, J = 5000 particles, discount 0.95, population 10^6.
struct AppConfig {
  PriorSpec priors;
  FilterConfig filter;
  ObservationLink link;

  bool operator==(const AppConfig&) const = default;
};

// Parses the JSON configuration file.  Every key is optional (missing keys
// keep their defaults); unknown keys and out-of-support values raise a
// ValidationError naming the offending key.  The schema is documented in the
// README.
AppConfig parse_config(const std::string& path);
AppConfig parse_config_text(const std::string& text, const std::string& origin);

// Deterministic re-serialization; parse(serialize(cfg)) == cfg.
std::string serialize_config(const AppConfig& config);

// Default configuration file location: the EPIFILTER_CONFIG environment
// variable when set, otherwise none (paper defaults apply).
AppConfig load_default_config();

}  // namespace epifilter
