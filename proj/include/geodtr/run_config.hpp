#pragma once

#include "geodtr/training.hpp"

#include <json.hpp>

namespace geodtr {

struct PathsConfig {
  std::string train_manifest;
  std::string eval_manifest;
  std::string out_dir = "runs/default";
  std::string checkpoint;
};

/// Effective configuration: JSON file with flat sections
/// model/train/augment/paths, command-line overrides applied on top.
/// Unknown keys are rejected.
struct RunConfig {
  TrainConfig train;  // embeds the model config and augment levels
  PathsConfig paths;

  static RunConfig defaults() { return RunConfig{}; }
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace geodtr
