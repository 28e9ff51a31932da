#include "geodtr/run_config.hpp"

#include <doctest.h>

using namespace geodtr;

TEST_CASE("defaults carry the reference hyperparameters") {
  const RunConfig cfg = RunConfig::defaults();
  CHECK(cfg.train.alpha == 10.0);
  CHECK(cfg.train.beta_ground == 5.0);
  CHECK(cfg.train.beta_aerial == 5.0);
  CHECK(cfg.train.model.k == 8);
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.train.epochs == 200);
  CHECK(cfg.train.learning_rate == 1e-4);
  CHECK(cfg.train.weight_decay == 0.03);
  CHECK(cfg.train.model.heads == 4);
  CHECK(cfg.train.model.layers == 2);
  CHECK(cfg.train.model.dropout == 0.3);
  CHECK(cfg.train.cf_enabled);
  CHECK(cfg.train.use_polar_transform);
}

TEST_CASE("config round trips through JSON") {
  RunConfig cfg = RunConfig::defaults();
  cfg.train.model.k = 4;
  cfg.train.model.channels = 16;
  cfg.train.batch_size = 8;
  cfg.train.seed = 99;
  cfg.train.layout_level = AugmentLevel::weak;
  cfg.paths.train_manifest = "data/train/manifest.csv";

  const nlohmann::json j = cfg.to_json();
  const RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.train.model.k == 4);
  CHECK(back.train.layout_level == AugmentLevel::weak);
  CHECK(back.paths.train_manifest == "data/train/manifest.csv");
}

TEST_CASE("unknown keys and sections are rejected") {
  nlohmann::json j = RunConfig::defaults().to_json();
  j["model"]["bogus"] = 1;
  CHECK_THROWS_WITH_AS(RunConfig::from_json(j),
                       "unknown key 'bogus' in config section 'model'",
                       std::invalid_argument);

  nlohmann::json j2 = RunConfig::defaults().to_json();
  j2["surprise"] = nlohmann::json::object();
  CHECK_THROWS_AS(RunConfig::from_json(j2), std::invalid_argument);

  nlohmann::json j3 = RunConfig::defaults().to_json();
  j3["train"]["momentum"] = 0.9;
  CHECK_THROWS_AS(RunConfig::from_json(j3), std::invalid_argument);
}

TEST_CASE("partial configs inherit defaults") {
  const auto j = nlohmann::json::parse(R"({"train": {"batch_size": 4}})");
  const RunConfig cfg = RunConfig::from_json(j);
  CHECK(cfg.train.batch_size == 4);
  CHECK(cfg.train.alpha == 10.0);
  CHECK(cfg.train.model.k == 8);
}

TEST_CASE("augment levels parse strictly") {
  CHECK(augment_level_from_string("none") == AugmentLevel::none);
  CHECK(augment_level_from_string("weak") == AugmentLevel::weak);
  CHECK(augment_level_from_string("strong") == AugmentLevel::strong);
  CHECK_THROWS_AS(augment_level_from_string("medium"), std::invalid_argument);

  nlohmann::json j = RunConfig::defaults().to_json();
  j["augment"]["layout_level"] = "mild";
  CHECK_THROWS_AS(RunConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("model config validation catches bad shapes") {
  ModelConfig cfg;
  cfg.heads = 3;  // D_e = 8 for the default grids; 3 does not divide 8
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);

  ModelConfig cfg2;
  cfg2.ground_height = 33;
  CHECK_THROWS_AS(cfg2.validate(true), std::invalid_argument);

  ModelConfig ok;
  ok.validate(true);
  ok.validate(false);

  ModelConfig shared;
  shared.share_weights = true;
  shared.validate(true);  // grids match under the polar transform
  CHECK_THROWS_AS(shared.validate(false), std::invalid_argument);
}
