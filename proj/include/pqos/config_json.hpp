#pragma once

// JSON configuration documents. Every section is optional; unknown keys are
// rejected with a ConfigError naming the dotted key path.
//
//   {
//     "environment": { "road_length_m": 18000, "cell_positions_m": [...], ...,
//                      "load_process": { "mean_load": 0.4, ... } },
//     "campaign":    { "n_vehicles": 4, "start_gap_s": 180, ... },
//     "gbt":         { "n_rounds": 200, "max_depth": 4, ... },
//     "experiment":  { "self_id": 4, "next_ids": [1, 3], ... }
//   }

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pqos/evaluation.hpp"
#include "pqos/gbt.hpp"
#include "pqos/radio_sim.hpp"

namespace pqos::config {

struct PipelineConfig {
  radio::EnvironmentConfig environment;
  radio::CampaignConfig campaign;
  gbt::GbtConfig gbt;
  evaluation::ExperimentConfig experiment;  // experiment.gbt mirrors `gbt`
};

/// When the experiment section omits round_length_m it is derived from the
/// environment's road length.
PipelineConfig parse(const std::string& text);
PipelineConfig load(const std::filesystem::path& path);

nlohmann::json to_json(const radio::EnvironmentConfig& env);
nlohmann::json to_json(const radio::CampaignConfig& campaign);
nlohmann::json to_json(const gbt::GbtConfig& config);
nlohmann::json to_json(const evaluation::ExperimentConfig& config);  // without the gbt part
nlohmann::json to_json(const PipelineConfig& config);

radio::EnvironmentConfig environment_from_json(const nlohmann::json& j);
radio::CampaignConfig campaign_from_json(const nlohmann::json& j);
gbt::GbtConfig gbt_from_json(const nlohmann::json& j);
evaluation::ExperimentConfig experiment_from_json(const nlohmann::json& j);

}  // namespace pqos::config
