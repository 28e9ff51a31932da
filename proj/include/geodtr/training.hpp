#pragma once

#include "geodtr/datagen.hpp"
#include "geodtr/model.hpp"
#include "geodtr/optim.hpp"
#include "geodtr/retrieval.hpp"

namespace geodtr {

struct TrainConfig {
  int batch_size = 32;
  int epochs = 200;
  long max_steps = 0;  // 0 = bounded by epochs only
  double learning_rate = 1e-4;
  double weight_decay = 0.03;
  double alpha = 10.0;
  double beta_ground = 5.0;
  double beta_aerial = 5.0;
  bool cf_enabled = true;
  bool use_polar_transform = true;
  AugmentLevel layout_level = AugmentLevel::strong;
  AugmentLevel semantic_level = AugmentLevel::strong;
  std::uint64_t seed = 0;
  bool deterministic = false;
  double val_fraction = 0.1;
  ModelConfig model;

  LossConfig loss_config() const {
    return LossConfig{alpha, beta_ground, beta_aerial, cf_enabled};
  }
  void validate() const;
};

struct LoadedPair {
  Image aerial;
  Image ground;
  int id = 0;
};

std::vector<LoadedPair> load_pairs(const DatasetManifest& manifest);

struct LogRow {
  long step = 0;
  double triplet = 0, cf_g = 0, cf_a = 0, total = 0, lr = 0;
};

struct TrainResult {
  std::string final_checkpoint;
  std::string best_checkpoint;
  std::string metrics_csv;
  double initial_loss = 0;
  double final_loss = 0;
  double best_val_r1 = -1.0;
  long steps = 0;
  std::vector<LogRow> log;
};

/// Full training loop: seeded shuffling, layout simulation and semantic
/// augmentation per item, optional polar transform on the aerial view,
/// AdamW with cosine decay. Writes metrics.csv plus final/best checkpoints
/// under out_dir. The best checkpoint is selected by held-out R@1 on a
/// validation split (the tail val_fraction of the manifest).
TrainResult train(const TrainConfig& cfg, const DatasetManifest& manifest,
                  const std::string& out_dir);

/// Embeds every pair in evaluation mode and reports R@1/5/10/1%.
Recalls evaluate_model(GeoDtr& model, const DatasetManifest& manifest,
                       bool deterministic = false);
Recalls evaluate_pairs(GeoDtr& model, const std::vector<LoadedPair>& pairs,
                       bool deterministic = false);

/// Prepares one pair for the two branches (applies the polar transform to
/// the aerial view when the model was built with it).
BatchItemInput prepare_input(const GeoDtr& model, const Image& ground,
                             const Image& aerial);

struct GradCheckConfig {
  ModelConfig model;
  LossConfig loss;
  int batch = 2;
  std::uint64_t seed = 7;
  double fd_step = 1e-5;
  long max_entries_per_tensor = 0;  // 0 = check every entry

  /// The small shape used by the verification harness: C=4, feature grids
  /// 2x4, K=2, 2 heads, dropout off.
  static GradCheckConfig tiny();
};

struct GradCheckRow {
  std::string name;
  long rows = 0, cols = 0;
  double max_rel_err = 0;
  double max_abs_err = 0;
  bool cf_grad_zero = false;  // no gradient reaches this tensor from the CF terms
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double max_rel_err = 0;
  double fd_step = 0;
  long params_checked = 0;
  double min_saliency_gap = 0;  // smallest top-2 channel gap in the batch
};

/// Compares analytic gradients of the total loss against central finite
/// differences for every parameter tensor.
GradCheckReport grad_check(const GradCheckConfig& cfg);

/// Relative error of the finite-difference harness on f(x) = x^2.
double grad_check_quadratic_selftest();

/// rel = |a - b| / max(|a|, |b|, 1e-6)
double relative_error(double a, double b);

}  // namespace geodtr
