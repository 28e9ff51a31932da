#include "geodtr/run_config.hpp"

#include <fstream>

namespace geodtr {

using nlohmann::json;

namespace {

/// Reads fields out of a section object, rejecting keys nobody consumed.
class SectionReader {
 public:
  SectionReader(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object())
      throw std::invalid_argument("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    if (auto it = j_.find(key); it != j_.end()) {
      out = it->get<T>();
      seen_.push_back(key);
    }
  }

  void read_level(const char* key, AugmentLevel& out) {
    std::string s;
    read(key, s);
    if (!s.empty()) out = augment_level_from_string(s);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw std::invalid_argument("unknown key '" + key + "' in config section '" +
                                    name_ + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::vector<std::string> seen_;
};

}  // namespace

json model_config_to_json(const ModelConfig& cfg) {
  return json{{"channels", cfg.channels},
              {"k", cfg.k},
              {"heads", cfg.heads},
              {"layers", cfg.layers},
              {"dropout", cfg.dropout},
              {"ff_dim", cfg.ff_dim},
              {"downsample", cfg.downsample},
              {"aerial_size", cfg.aerial_size},
              {"ground_height", cfg.ground_height},
              {"ground_width", cfg.ground_width},
              {"share_weights", cfg.share_weights},
              {"normalize_embeddings", cfg.normalize_embeddings}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  SectionReader s(j, "model");
  s.read("channels", cfg.channels);
  s.read("k", cfg.k);
  s.read("heads", cfg.heads);
  s.read("layers", cfg.layers);
  s.read("dropout", cfg.dropout);
  s.read("ff_dim", cfg.ff_dim);
  s.read("downsample", cfg.downsample);
  s.read("aerial_size", cfg.aerial_size);
  s.read("ground_height", cfg.ground_height);
  s.read("ground_width", cfg.ground_width);
  s.read("share_weights", cfg.share_weights);
  s.read("normalize_embeddings", cfg.normalize_embeddings);
  s.finish();
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  j["model"] = model_config_to_json(train.model);
  j["train"] = json{{"batch_size", train.batch_size},
                    {"epochs", train.epochs},
                    {"max_steps", train.max_steps},
                    {"learning_rate", train.learning_rate},
                    {"weight_decay", train.weight_decay},
                    {"alpha", train.alpha},
                    {"beta_ground", train.beta_ground},
                    {"beta_aerial", train.beta_aerial},
                    {"cf_enabled", train.cf_enabled},
                    {"use_polar_transform", train.use_polar_transform},
                    {"seed", train.seed},
                    {"deterministic", train.deterministic},
                    {"val_fraction", train.val_fraction}};
  j["augment"] = json{{"layout_level", augment_level_name(train.layout_level)},
                      {"semantic_level", augment_level_name(train.semantic_level)}};
  j["paths"] = json{{"train_manifest", paths.train_manifest},
                    {"eval_manifest", paths.eval_manifest},
                    {"out_dir", paths.out_dir},
                    {"checkpoint", paths.checkpoint}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config root must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "model" && key != "train" && key != "augment" && key != "paths")
      throw std::invalid_argument("unknown config section '" + key + "'");
  }

  RunConfig cfg;
  if (j.contains("model")) cfg.train.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) {
    SectionReader s(j.at("train"), "train");
    s.read("batch_size", cfg.train.batch_size);
    s.read("epochs", cfg.train.epochs);
    s.read("max_steps", cfg.train.max_steps);
    s.read("learning_rate", cfg.train.learning_rate);
    s.read("weight_decay", cfg.train.weight_decay);
    s.read("alpha", cfg.train.alpha);
    s.read("beta_ground", cfg.train.beta_ground);
    s.read("beta_aerial", cfg.train.beta_aerial);
    s.read("cf_enabled", cfg.train.cf_enabled);
    s.read("use_polar_transform", cfg.train.use_polar_transform);
    s.read("seed", cfg.train.seed);
    s.read("deterministic", cfg.train.deterministic);
    s.read("val_fraction", cfg.train.val_fraction);
    s.finish();
  }
  if (j.contains("augment")) {
    SectionReader s(j.at("augment"), "augment");
    s.read_level("layout_level", cfg.train.layout_level);
    s.read_level("semantic_level", cfg.train.semantic_level);
    s.finish();
  }
  if (j.contains("paths")) {
    SectionReader s(j.at("paths"), "paths");
    s.read("train_manifest", cfg.paths.train_manifest);
    s.read("eval_manifest", cfg.paths.eval_manifest);
    s.read("out_dir", cfg.paths.out_dir);
    s.read("checkpoint", cfg.paths.checkpoint);
    s.finish();
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace geodtr
