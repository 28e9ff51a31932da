#pragma once

#include "geodtr/model.hpp"
#include "geodtr/optim.hpp"

#include <json.hpp>

namespace geodtr {

/// Checkpoints pair a GDTR1 tensor container (parameters, optimizer
/// moments, step counter) with a `<path>.json` sidecar holding the
/// configuration snapshot. Round trips are value-exact (f64 payloads).
struct Checkpoint {
  GeoDtr model;
  AdamW optimizer;
  long step = 0;
  nlohmann::json config;
};

void save_checkpoint(const std::string& path, GeoDtr& model,
                     const AdamW* optimizer, long step,
                     const nlohmann::json& config);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace geodtr
