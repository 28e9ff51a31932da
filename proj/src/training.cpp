#include "geodtr/training.hpp"

#include "geodtr/checkpoint.hpp"
#include "geodtr/parallel.hpp"
#include "geodtr/png_io.hpp"
#include "geodtr/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace geodtr {

namespace {

// seed stream tags
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kAugStream = 3;
constexpr std::uint64_t kCfStream = 4;
constexpr std::uint64_t kDropStream = 5;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
  if (weight_decay < 0) throw std::invalid_argument("weight_decay must be nonnegative");
  if (val_fraction < 0 || val_fraction >= 1)
    throw std::invalid_argument("val_fraction must lie in [0, 1)");
  loss_config().validate();
  model.validate(use_polar_transform);
}

std::vector<LoadedPair> load_pairs(const DatasetManifest& manifest) {
  std::vector<LoadedPair> pairs(manifest.entries.size());
  parallel_for(static_cast<int>(manifest.entries.size()), [&](int i) {
    pairs[i].aerial = read_png(manifest.aerial_file(i), View::aerial);
    pairs[i].ground = read_png(manifest.ground_file(i), View::panorama);
    pairs[i].id = manifest.entries[i].id;
  });
  return pairs;
}

BatchItemInput prepare_input(const GeoDtr& model, const Image& ground,
                             const Image& aerial) {
  BatchItemInput item;
  item.ground = ground;
  item.aerial = model.use_polar_transform()
                    ? polar_transform(aerial, model.config().ground_height,
                                      model.config().ground_width)
                    : aerial;
  return item;
}

namespace {

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

Recalls evaluate_subset(GeoDtr& model, const std::vector<LoadedPair>& pairs,
                        const std::vector<int>& indices, bool deterministic) {
  if (indices.empty()) throw std::invalid_argument("evaluation set is empty");
  std::vector<Vec> fg(indices.size()), fa(indices.size());
  parallel_for(
      static_cast<int>(indices.size()),
      [&](int i) {
        const LoadedPair& pair = pairs[indices[i]];
        const BatchItemInput input = prepare_input(model, pair.ground, pair.aerial);
        fg[i] = embed_image(input.ground, model.branch(Branch::ground), model.config(),
                            Branch::ground, false, nullptr, nullptr)
                    .data;
        fa[i] = embed_image(input.aerial, model.branch(Branch::aerial), model.config(),
                            Branch::aerial, false, nullptr, nullptr)
                    .data;
      },
      deterministic);
  return standard_recalls(distance_matrix(fg, fa));
}

}  // namespace

Recalls evaluate_pairs(GeoDtr& model, const std::vector<LoadedPair>& pairs,
                       bool deterministic) {
  std::vector<int> all(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) all[i] = static_cast<int>(i);
  return evaluate_subset(model, pairs, all, deterministic);
}

Recalls evaluate_model(GeoDtr& model, const DatasetManifest& manifest,
                       bool deterministic) {
  const std::vector<LoadedPair> pairs = load_pairs(manifest);
  return evaluate_pairs(model, pairs, deterministic);
}

TrainResult train(const TrainConfig& cfg, const DatasetManifest& manifest,
                  const std::string& out_dir) {
  cfg.validate();
  const std::vector<LoadedPair> pairs = load_pairs(manifest);
  const int n_total = static_cast<int>(pairs.size());
  if (cfg.batch_size > n_total)
    throw std::invalid_argument("batch_size exceeds dataset size");

  // deterministic tail split for best-checkpoint selection
  const int n_val = static_cast<int>(std::floor(cfg.val_fraction * n_total));
  const int n_train = n_total - n_val;
  if (cfg.batch_size > n_train)
    throw std::invalid_argument("batch_size exceeds the training split");
  std::vector<int> train_idx(n_train), val_idx(n_val);
  for (int i = 0; i < n_train; ++i) train_idx[i] = i;
  for (int i = 0; i < n_val; ++i) val_idx[i] = n_train + i;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir + ": " + ec.message());

  GeoDtr model = GeoDtr::build(cfg.model, cfg.use_polar_transform,
                               derive_seed(cfg.seed, {kInitStream}));
  AdamW optimizer;
  const LossConfig loss_cfg = cfg.loss_config();

  const long steps_per_epoch = n_train / cfg.batch_size;
  long total_steps = steps_per_epoch * cfg.epochs;
  if (cfg.max_steps > 0) total_steps = std::min(total_steps, cfg.max_steps);
  if (total_steps < 1) throw std::invalid_argument("no full batch fits the training split");

  TrainResult result;
  result.metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
  result.final_checkpoint = (fs::path(out_dir) / "final.gdtr").string();
  result.best_checkpoint = (fs::path(out_dir) / "best.gdtr").string();

  RunConfig snapshot;
  snapshot.train = cfg;
  const nlohmann::json config_json = snapshot.to_json();

  long step = 0;
  bool best_saved = false;
  for (int epoch = 0; epoch < cfg.epochs && step < total_steps; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)}));
    const std::vector<int> order = shuffled_indices(n_train, shuffle_rng);

    for (long b = 0; b < steps_per_epoch && step < total_steps; ++b) {
      std::vector<BatchItemInput> items(cfg.batch_size);
      parallel_for(
          cfg.batch_size,
          [&](int slot) {
            const int idx = train_idx[order[b * cfg.batch_size + slot]];
            const LoadedPair& pair = pairs[idx];
            const std::uint64_t aug_seed =
                derive_seed(cfg.seed, {kAugStream, static_cast<std::uint64_t>(epoch),
                                       static_cast<std::uint64_t>(b),
                                       static_cast<std::uint64_t>(slot)});
            const AugmentConfig aug = AugmentConfig::from_levels(
                cfg.layout_level, cfg.semantic_level, aug_seed);

            Rng layout_rng(derive_seed(aug_seed, {0}));
            auto [aerial, ground] =
                layout_simulate(pair.aerial, pair.ground, aug, layout_rng);
            Rng sem_a(derive_seed(aug_seed, {1}));
            Rng sem_g(derive_seed(aug_seed, {2}));
            aerial = semantic_augment(aerial, aug, sem_a);
            ground = semantic_augment(ground, aug, sem_g);

            items[slot] = prepare_input(model, ground, aerial);
            items[slot].dropout_seed =
                derive_seed(cfg.seed, {kDropStream, static_cast<std::uint64_t>(step),
                                       static_cast<std::uint64_t>(slot)});
            items[slot].cf_seed =
                derive_seed(cfg.seed, {kCfStream, static_cast<std::uint64_t>(step),
                                       static_cast<std::uint64_t>(slot)});
          },
          cfg.deterministic);

      model.zero_grads();
      const BatchLoss loss = batch_forward_backward(model, items, loss_cfg,
                                                    /*train_mode=*/true,
                                                    /*compute_grads=*/true,
                                                    cfg.deterministic);
      const double lr_now = cosine_lr(cfg.learning_rate, step, total_steps);
      optimizer.begin_step();
      model.visit_params([&](const std::string& name, Tensor& t) {
        optimizer.update(name, t, lr_now, cfg.weight_decay);
      });

      result.log.push_back(
          LogRow{step, loss.triplet, loss.cf_ground, loss.cf_aerial, loss.total, lr_now});
      if (step == 0) result.initial_loss = loss.total;
      result.final_loss = loss.total;
      ++step;
    }

    if (n_val > 0) {
      const Recalls val = evaluate_subset(model, pairs, val_idx, cfg.deterministic);
      if (val.r1 > result.best_val_r1) {
        result.best_val_r1 = val.r1;
        save_checkpoint(result.best_checkpoint, model, &optimizer, step, config_json);
        best_saved = true;
      }
    }
  }
  result.steps = step;

  save_checkpoint(result.final_checkpoint, model, &optimizer, step, config_json);
  if (!best_saved) {
    save_checkpoint(result.best_checkpoint, model, &optimizer, step, config_json);
    result.best_val_r1 = -1.0;
  }

  std::ofstream csv(result.metrics_csv, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + result.metrics_csv);
  csv << "step,triplet,cf_g,cf_a,total,lr\n";
  for (const LogRow& row : result.log) {
    csv << row.step << ',' << format_double(row.triplet) << ','
        << format_double(row.cf_g) << ',' << format_double(row.cf_a) << ','
        << format_double(row.total) << ',' << format_double(row.lr) << '\n';
  }
  return result;
}

GradCheckConfig GradCheckConfig::tiny() {
  GradCheckConfig cfg;
  cfg.model.channels = 4;
  cfg.model.k = 2;
  cfg.model.heads = 2;
  cfg.model.layers = 2;
  cfg.model.dropout = 0.0;
  cfg.model.ff_dim = 16;
  cfg.model.aerial_size = 32;
  cfg.model.ground_height = 32;  // feature grid 2x4, D_e = 4
  cfg.model.ground_width = 64;
  return cfg;
}

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

double grad_check_quadratic_selftest() {
  const double h = 1e-5;
  double worst = 0.0;
  for (double x : {-2.0, -0.5, 0.3, 1.7}) {
    const auto f = [](double t) { return t * t; };
    const double fd = (f(x + h) - f(x - h)) / (2.0 * h);
    worst = std::max(worst, relative_error(2.0 * x, fd));
  }
  return worst;
}

GradCheckReport grad_check(const GradCheckConfig& cfg) {
  cfg.model.validate(true);
  GeoDtr model = GeoDtr::build(cfg.model, true, derive_seed(cfg.seed, {kInitStream}));

  // Central differences are only meaningful where the loss is locally
  // smooth. Three nonsmooth mechanisms sit in the forward pass: the index
  // map's argmax (a genuine discontinuity at channel ties), ReLU kinks,
  // and HardTanh kinks. A parameter step of fd_step moves any
  // pre-activation by at most ~fd_step * |activation|, so redraw the
  // fixed batch until every argmax gap and every kink margin clears a
  // multiple of that reach.
  constexpr double kMinArgmaxGap = 1e-2;
  constexpr double kMinKinkMargin = 5e-5;
  Rng data_rng(derive_seed(cfg.seed, {0xda7a}));
  std::vector<BatchItemInput> items(cfg.batch);
  double min_gap = 0.0;
  double best_score = -1e300;
  std::vector<BatchItemInput> best_items;
  double best_gap = 0.0;
  for (int attempt = 0; attempt < 256; ++attempt) {
    for (int i = 0; i < cfg.batch; ++i) {
      const Grid in = cfg.model.branch_input(Branch::ground, true);
      Image ground = Image::zeros(in.h, in.w, View::panorama);
      Image aerial = Image::zeros(in.h, in.w, View::panorama);
      for (auto* img : {&ground, &aerial})
        for (auto& p : img->plane)
          for (Eigen::Index e = 0; e < p.size(); ++e) p.data()[e] = data_rng.uniform();
      items[i].ground = std::move(ground);
      items[i].aerial = std::move(aerial);
      items[i].dropout_seed = 0;  // dropout off (eval-mode forward)
      items[i].cf_seed = derive_seed(cfg.seed, {kCfStream, static_cast<std::uint64_t>(i)});
    }

    double gap = 1e300;          // saliency top-2 channel gap
    double relu_margin = 1e300;  // |pre-activation| across all conv layers
    double ht_margin = 1e300;    // |1 - |pre|| across both HardTanh sites
    for (const auto& item : items) {
      for (Branch b : {Branch::ground, Branch::aerial}) {
        BackboneCache bc;
        const RawFeatures r =
            backbone_forward(b == Branch::ground ? item.ground : item.aerial,
                             model.branch(b).backbone, cfg.model, b, &bc);
        for (const auto& layer : bc.layer)
          relu_margin = std::min(relu_margin, layer.pre.cwiseAbs().minCoeff());
        for (Eigen::Index s = 0; s < r.data.cols(); ++s) {
          double top = -1e300, second = -1e300;
          for (Eigen::Index c = 0; c < r.data.rows(); ++c) {
            const double v = r.data(c, s);
            if (v > top) {
              second = top;
              top = v;
            } else if (v > second) {
              second = v;
            }
          }
          gap = std::min(gap, top - second);
        }
        ExtractorCache ec;
        extract_descriptors(r, model.branch(b).extractor, false, nullptr, &ec);
        ht_margin = std::min(ht_margin,
                             (ec.pe_pre.array().abs() - 1.0).abs().minCoeff());
        ht_margin = std::min(ht_margin,
                             (ec.p_pre.array().abs() - 1.0).abs().minCoeff());
      }
    }
    const double score = std::min({gap / kMinArgmaxGap, relu_margin / kMinKinkMargin,
                                   ht_margin / kMinKinkMargin});
    if (score > best_score) {
      best_score = score;
      best_items = items;
      best_gap = gap;
    }
    if (score >= 1.0) break;
  }
  items = std::move(best_items);
  min_gap = best_gap;

  const auto loss_only = [&]() {
    return batch_forward_backward(model, items, cfg.loss, /*train_mode=*/false,
                                  /*compute_grads=*/false, true)
        .total;
  };

  // analytic gradients of the full loss
  model.zero_grads();
  batch_forward_backward(model, items, cfg.loss, false, true, true);
  std::map<std::string, Mat> analytic;
  model.visit_params(
      [&](const std::string& name, Tensor& t) { analytic.emplace(name, t.g); });

  // triplet-only gradients expose which tensors the CF terms touch
  LossConfig no_cf = cfg.loss;
  no_cf.cf_enabled = false;
  model.zero_grads();
  batch_forward_backward(model, items, no_cf, false, true, true);
  std::map<std::string, double> cf_contribution;
  model.visit_params([&](const std::string& name, Tensor& t) {
    cf_contribution[name] = (analytic.at(name) - t.g).cwiseAbs().maxCoeff();
  });

  GradCheckReport report;
  report.fd_step = cfg.fd_step;
  report.min_saliency_gap = min_gap;
  model.visit_params([&](const std::string& name, Tensor& t) {
    GradCheckRow row;
    row.name = name;
    row.rows = t.v.rows();
    row.cols = t.v.cols();
    row.cf_grad_zero = cf_contribution.at(name) == 0.0;
    const Mat& g = analytic.at(name);
    Eigen::Index stride = 1;
    if (cfg.max_entries_per_tensor > 0 && t.v.size() > cfg.max_entries_per_tensor)
      stride = (t.v.size() + cfg.max_entries_per_tensor - 1) / cfg.max_entries_per_tensor;
    for (Eigen::Index e = 0; e < t.v.size(); e += stride) {
      double& theta = t.v.data()[e];
      const double saved = theta;
      theta = saved + cfg.fd_step;
      const double up = loss_only();
      theta = saved - cfg.fd_step;
      const double down = loss_only();
      theta = saved;
      const double fd = (up - down) / (2.0 * cfg.fd_step);
      const double rel = relative_error(g.data()[e], fd);
      row.max_rel_err = std::max(row.max_rel_err, rel);
      row.max_abs_err = std::max(row.max_abs_err, std::abs(g.data()[e] - fd));
      ++report.params_checked;
    }
    report.rows.push_back(std::move(row));
    report.max_rel_err = std::max(report.max_rel_err, report.rows.back().max_rel_err);
  });
  return report;
}

}  // namespace geodtr
