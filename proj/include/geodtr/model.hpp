#pragma once

#include "geodtr/augment.hpp"
#include "geodtr/embedding.hpp"
#include "geodtr/extractor.hpp"
#include "geodtr/losses.hpp"

#include <memory>

namespace geodtr {

struct BranchParams {
  BackboneParams backbone;
  ExtractorParams extractor;
  Grid input;  // expected image size for this branch
  Grid grid;   // feature grid

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    backbone.visit(prefix + "/backbone", f);
    extractor.visit(prefix + "/extractor", f);
  }
};

/// Two-branch network: per-view backbone and layout extractor with
/// independent parameters (shared when cfg.share_weights).
class GeoDtr {
 public:
  static GeoDtr build(const ModelConfig& cfg, bool use_polar_transform,
                      std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  bool use_polar_transform() const { return use_polar_; }

  BranchParams& branch(Branch b) {
    return (b == Branch::ground || cfg_.share_weights) ? ground_ : aerial_;
  }
  const BranchParams& branch(Branch b) const {
    return (b == Branch::ground || cfg_.share_weights) ? ground_ : aerial_;
  }

  /// Visits every independent parameter tensor with (name, Tensor&).
  template <class F>
  void visit_params(F&& f) {
    ground_.visit("ground", f);
    if (!cfg_.share_weights) aerial_.visit("aerial", f);
  }

  void zero_grads();
  long param_count();

 private:
  ModelConfig cfg_;
  bool use_polar_ = true;
  BranchParams ground_, aerial_;
};

struct ViewCaches {
  BackboneCache backbone;
  ExtractorCache extractor;
};

/// Full pipeline for one prepared branch input: backbone, descriptors,
/// modulation, normalization (per config). caches may be null.
ModulatedEmbedding embed_image(const Image& img, const BranchParams& params,
                               const ModelConfig& cfg, Branch branch,
                               bool train_mode, Rng* dropout_rng,
                               ViewCaches* caches, Mat* descriptors_out = nullptr,
                               RawFeatures* features_out = nullptr,
                               Vec* raw_out = nullptr);

/// One item's prepared inputs; the aerial image is already polar
/// transformed when the model was built with the transform enabled.
struct BatchItemInput {
  Image ground;
  Image aerial;
  std::uint64_t dropout_seed = 0;
  std::uint64_t cf_seed = 0;
};

struct BatchLoss {
  double triplet = 0;
  double cf_ground = 0;
  double cf_aerial = 0;
  double total = 0;
};

/// Forward (and optionally backward) over a batch. Parameter gradients
/// accumulate into the model tensors in item order; pass
/// compute_grads=false for a pure loss evaluation (finite differences).
/// Counterfactual descriptor draws are derived from each item's cf_seed,
/// so repeated calls with the same seeds see the same draws.
BatchLoss batch_forward_backward(GeoDtr& model,
                                 const std::vector<BatchItemInput>& items,
                                 const LossConfig& loss_cfg, bool train_mode,
                                 bool compute_grads, bool deterministic);

}  // namespace geodtr
