#pragma once

// JSON configuration: parsing (strict; unknown keys are rejected) and the
// resolved-config echo written next to every output.

#include <string>

#include <json.hpp>

#include "aggreg/aggregators.hpp"
#include "aggreg/harness.hpp"
#include "aggreg/hardness.hpp"

namespace aggreg {

// All throw ConfigError on malformed or out-of-range fields.
PenaltySpec penalty_from_json(const nlohmann::json& j, double default_sigma = 1.0);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json load_json_file(const std::string& path);

nlohmann::json to_json(const PenaltySpec& p);
nlohmann::json to_json(const ExperimentConfig& cfg);

DictionaryKind parse_dictionary_kind(const std::string& s);
TruthKind parse_truth_kind(const std::string& s);
DesignKind parse_design_kind(const std::string& s);
HardKind parse_hard_kind(const std::string& s);
RateKind parse_rate_kind(const std::string& s);

}  // namespace aggreg
