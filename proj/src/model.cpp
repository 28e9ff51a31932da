#include "geodtr/model.hpp"

#include "geodtr/parallel.hpp"

namespace geodtr {

GeoDtr GeoDtr::build(const ModelConfig& cfg, bool use_polar_transform,
                     std::uint64_t seed) {
  cfg.validate(use_polar_transform);
  GeoDtr model;
  model.cfg_ = cfg;
  model.use_polar_ = use_polar_transform;

  const auto init_branch = [&](Branch b, BranchParams& params, std::uint64_t branch_tag) {
    Rng rng(derive_seed(seed, {0x1417, branch_tag}));
    params.input = cfg.branch_input(b, use_polar_transform);
    params.grid = cfg.branch_grid(b, use_polar_transform);
    params.backbone.init(cfg.channels, rng);
    params.extractor.init(cfg, params.grid, rng);
  };
  init_branch(Branch::ground, model.ground_, 0);
  init_branch(Branch::aerial, model.aerial_, 1);
  return model;
}

void GeoDtr::zero_grads() {
  visit_params([](const std::string&, Tensor& t) { t.zero_grad(); });
}

long GeoDtr::param_count() {
  long n = 0;
  visit_params([&](const std::string&, Tensor& t) { n += t.v.size(); });
  return n;
}

ModulatedEmbedding embed_image(const Image& img, const BranchParams& params,
                               const ModelConfig& cfg, Branch branch,
                               bool train_mode, Rng* dropout_rng,
                               ViewCaches* caches, Mat* descriptors_out,
                               RawFeatures* features_out, Vec* raw_out) {
  if (img.height != params.input.h || img.width != params.input.w)
    throw std::invalid_argument(std::string("image size ") + std::to_string(img.height) +
                                "x" + std::to_string(img.width) + " does not match " +
                                branch_name(branch) + " branch input " +
                                std::to_string(params.input.h) + "x" +
                                std::to_string(params.input.w));

  RawFeatures r = backbone_forward(img, params.backbone, cfg, branch,
                                   caches ? &caches->backbone : nullptr);
  Mat p = extract_descriptors(r, params.extractor, train_mode, dropout_rng,
                              caches ? &caches->extractor : nullptr);
  ModulatedEmbedding f = modulate(p, r.data);
  if (raw_out) *raw_out = f.data;
  if (descriptors_out) *descriptors_out = p;
  if (features_out) *features_out = std::move(r);
  return cfg.normalize_embeddings ? normalize(f) : f;
}

namespace {

struct ViewState {
  std::unique_ptr<ViewCaches> caches;
  RawFeatures features;
  Mat descriptors;
  Vec f_raw;   // pre-normalization
  Vec f;       // embedding used by the losses
  Mat p_hat;   // imaginary descriptors (cf only)
  Vec fhat_raw;
  Vec fhat;
};

}  // namespace

BatchLoss batch_forward_backward(GeoDtr& model,
                                 const std::vector<BatchItemInput>& items,
                                 const LossConfig& loss_cfg, bool train_mode,
                                 bool compute_grads, bool deterministic) {
  loss_cfg.validate();
  const int n = static_cast<int>(items.size());
  if (n < 2) throw std::invalid_argument("batch needs at least 2 pairs");
  const ModelConfig& cfg = model.config();
  const bool normalize_f = cfg.normalize_embeddings;

  std::vector<ViewState> ground(n), aerial(n);

  // phase 1: per-item forward passes (independent, parallel)
  parallel_for(
      n,
      [&](int i) {
        for (Branch b : {Branch::ground, Branch::aerial}) {
          ViewState& vs = b == Branch::ground ? ground[i] : aerial[i];
          const Image& img = b == Branch::ground ? items[i].ground : items[i].aerial;
          if (compute_grads) vs.caches = std::make_unique<ViewCaches>();

          Rng dropout_rng(derive_seed(items[i].dropout_seed,
                                      {static_cast<std::uint64_t>(b)}));
          ModulatedEmbedding f =
              embed_image(img, model.branch(b), cfg, b, train_mode,
                          train_mode ? &dropout_rng : nullptr, vs.caches.get(),
                          &vs.descriptors, &vs.features, &vs.f_raw);
          vs.f = f.data;

          if (loss_cfg.cf_enabled) {
            Rng cf_rng(derive_seed(items[i].cf_seed, {static_cast<std::uint64_t>(b)}));
            vs.p_hat = sample_imaginary_descriptors(
                static_cast<int>(vs.descriptors.rows()),
                static_cast<int>(vs.descriptors.cols()), cf_rng);
            ModulatedEmbedding fhat = modulate(vs.p_hat, vs.features.data);
            vs.fhat_raw = fhat.data;
            vs.fhat = normalize_f ? normalize(fhat).data : fhat.data;
          }
        }
      },
      deterministic);

  // phase 2: losses and embedding-space gradients
  std::vector<Vec> fg(n), fa(n);
  for (int i = 0; i < n; ++i) {
    fg[i] = ground[i].f;
    fa[i] = aerial[i].f;
  }

  BatchLoss loss;
  std::vector<Vec> dfg, dfa;
  if (compute_grads) {
    loss.triplet = batch_triplet_loss_grad(fg, fa, loss_cfg.alpha, dfg, dfa);
  } else {
    loss.triplet = batch_triplet_loss(fg, fa, loss_cfg.alpha);
  }

  std::vector<Vec> dfhat_g(n), dfhat_a(n);
  if (loss_cfg.cf_enabled) {
    for (int i = 0; i < n; ++i) {
      for (Branch b : {Branch::ground, Branch::aerial}) {
        ViewState& vs = b == Branch::ground ? ground[i] : aerial[i];
        const double beta =
            b == Branch::ground ? loss_cfg.beta_ground : loss_cfg.beta_aerial;
        const double d = (vs.f - vs.fhat).norm();
        double ddist = 0.0;
        const double term = counterfactual_loss_grad(d, beta, ddist) / n;
        (b == Branch::ground ? loss.cf_ground : loss.cf_aerial) += term;
        if (compute_grads) {
          auto [df, dfh] = distance_backward(vs.f, vs.fhat, ddist / n);
          (b == Branch::ground ? dfg[i] : dfa[i]) += df;
          (b == Branch::ground ? dfhat_g[i] : dfhat_a[i]) = std::move(dfh);
        }
      }
    }
  }
  loss.total = loss.triplet + loss.cf_ground + loss.cf_aerial;
  if (!compute_grads) return loss;

  // phase 3: per-item backward, sequential so parameter gradients
  // accumulate in a fixed order
  for (int i = 0; i < n; ++i) {
    for (Branch b : {Branch::ground, Branch::aerial}) {
      ViewState& vs = b == Branch::ground ? ground[i] : aerial[i];
      BranchParams& params = model.branch(b);
      const Vec& df = b == Branch::ground ? dfg[i] : dfa[i];

      Mat dp = Mat::Zero(vs.descriptors.rows(), vs.descriptors.cols());
      Mat dr = Mat::Zero(vs.features.data.rows(), vs.features.data.cols());

      const Vec df_raw = normalize_f ? normalize_backward(vs.f_raw, df) : df;
      modulate_backward(df_raw, vs.descriptors, vs.features.data, &dp, &dr);

      if (loss_cfg.cf_enabled) {
        const Vec& dfhat = b == Branch::ground ? dfhat_g[i] : dfhat_a[i];
        const Vec dfhat_raw =
            normalize_f ? normalize_backward(vs.fhat_raw, dfhat) : dfhat;
        modulate_backward(dfhat_raw, vs.p_hat, vs.features.data, nullptr, &dr);
      }

      dr += extractor_backward(dp, params.extractor, vs.caches->extractor);
      backbone_backward(dr, params.backbone, vs.caches->backbone);
    }
  }
  return loss;
}

}  // namespace geodtr
