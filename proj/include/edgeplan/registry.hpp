#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/types.hpp"

namespace edgeplan {

// Scenario files are a single JSON document; schema documented in the README.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& s);

void validate_scenario(const Scenario& s);

// All manifests whose task_kind matches, sorted by id ascending.
std::vector<ModelManifest> candidates_for(const TaskKind& kind, const Scenario& scenario);

// Plan <-> JSON, shared with the advisor wire schema:
//   {"tasks":[{"task":"image_captioning","model":"blip-caption","input":"user_data"}],
//    "combine":"single"}
nlohmann::json plan_to_json(const TaskPlan& plan);
TaskPlan plan_from_json(const nlohmann::json& j);

nlohmann::json fl_config_to_json(const FLConfig& cfg);
FLConfig fl_config_from_json(const nlohmann::json& j);

std::string input_source_to_string(const InputSource& s);
InputSource input_source_from_string(const std::string& s);

} // namespace edgeplan
