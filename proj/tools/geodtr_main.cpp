#include "geodtr/checkpoint.hpp"
#include "geodtr/png_io.hpp"
#include "geodtr/run_config.hpp"
#include "geodtr/tensor_io.hpp"
#include "geodtr/training.hpp"
#include "geodtr/viz.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace geodtr;

namespace {

struct CommonOverrides {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  std::string layout_level, semantic_level;
  int k = 0;
};

void add_common(CLI::App* cmd, CommonOverrides& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "global seed")->each([&](const std::string&) {
    c.seed_set = true;
  });
  cmd->add_flag("--deterministic", c.deterministic, "force sequential execution");
  cmd->add_option("--layout-level", c.layout_level, "none|weak|strong");
  cmd->add_option("--semantic-level", c.semantic_level, "none|weak|strong");
  cmd->add_option("--k", c.k, "number of layout descriptors");
}

RunConfig assemble(const CommonOverrides& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig::defaults()
                                        : RunConfig::from_file(c.config_path);
  if (c.seed_set) cfg.train.seed = c.seed;
  if (c.deterministic) cfg.train.deterministic = true;
  if (!c.layout_level.empty())
    cfg.train.layout_level = augment_level_from_string(c.layout_level);
  if (!c.semantic_level.empty())
    cfg.train.semantic_level = augment_level_from_string(c.semantic_level);
  if (c.k > 0) cfg.train.model.k = c.k;
  return cfg;
}

void print_recalls(const Recalls& r) {
  std::printf("metric  value\n");
  std::printf("R@1     %.4f\n", r.r1);
  std::printf("R@5     %.4f\n", r.r5);
  std::printf("R@10    %.4f\n", r.r10);
  std::printf("R@1%%    %.4f\n", r.r1pct);
}

void write_recalls_csv(const std::string& path, const Recalls& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "metric,value\nR@1,%.17g\nR@5,%.17g\nR@10,%.17g\nR@1%%,%.17g\n", r.r1,
                r.r5, r.r10, r.r1pct);
  out << buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GeoDTR: layout-modulated cross-view geo-localization, desk scale"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic paired dataset");
  int gen_n = 16;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_split = "train";
  SceneConfig scene;
  gen->add_option("--n", gen_n, "number of pairs")->required();
  gen->add_option("--seed", gen_seed, "global seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--split", gen_split, "split tag");
  gen->add_option("--noise-sigma", scene.noise_sigma, "ground noise sigma");
  gen->add_option("--brightness", scene.brightness_range, "ground brightness offset range");
  gen->add_option("--aerial-size", scene.aerial_size, "aerial side length");
  gen->add_option("--ground-height", scene.ground_height, "panorama height");
  gen->add_option("--ground-width", scene.ground_width, "panorama width");

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  CommonOverrides tr_common;
  add_common(tr, tr_common);
  std::string tr_manifest, tr_out;
  int tr_epochs = 0, tr_batch = 0;
  long tr_max_steps = -1;
  double tr_lr = 0;
  tr->add_option("--manifest", tr_manifest, "training manifest CSV");
  tr->add_option("--out", tr_out, "output directory");
  tr->add_option("--epochs", tr_epochs, "epoch count");
  tr->add_option("--batch-size", tr_batch, "batch size");
  tr->add_option("--max-steps", tr_max_steps, "optimizer step cap (0 = none)");
  tr->add_option("--lr", tr_lr, "learning rate");
  auto* tr_polar = tr->add_flag("--polar", "polar-transform aerial inputs");
  auto* tr_nopolar = tr->add_flag("--no-polar", "disable the polar transform");
  auto* tr_cf = tr->add_flag("--cf", "enable the counterfactual loss");
  auto* tr_nocf = tr->add_flag("--no-cf", "disable the counterfactual loss");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or exported embeddings");
  std::string ev_ckpt, ev_manifest, ev_export, ev_embeddings, ev_csv;
  bool ev_det = false;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint path");
  ev->add_option("--manifest", ev_manifest, "evaluation manifest CSV");
  ev->add_option("--embeddings", ev_embeddings,
                 "evaluate a previously exported embedding container instead");
  ev->add_option("--export-embeddings", ev_export, "write embeddings to this container");
  ev->add_option("--csv", ev_csv, "also write the recalls as metric,value CSV");
  ev->add_flag("--deterministic", ev_det, "force sequential execution");

  // augment
  auto* aug = app.add_subcommand("augment", "run the augmentation pipeline over a manifest");
  std::string aug_manifest, aug_out, aug_layout = "strong", aug_semantic = "strong";
  std::uint64_t aug_seed = 0;
  aug->add_option("--manifest", aug_manifest, "input manifest CSV")->required();
  aug->add_option("--out", aug_out, "output directory")->required();
  aug->add_option("--layout-level", aug_layout, "none|weak|strong");
  aug->add_option("--semantic-level", aug_semantic, "none|weak|strong");
  aug->add_option("--seed", aug_seed, "augmentation seed");

  // viz
  auto* vz = app.add_subcommand("viz", "render descriptor grids for a pair");
  std::string vz_ckpt, vz_manifest, vz_out = ".";
  int vz_index = 0;
  vz->add_option("--checkpoint", vz_ckpt, "checkpoint path")->required();
  vz->add_option("--manifest", vz_manifest, "manifest CSV")->required();
  vz->add_option("--index", vz_index, "pair index");
  vz->add_option("--out", vz_out, "output directory");

  // dedup
  auto* dd = app.add_subcommand("dedup", "detect duplicate pairs by pixel hash");
  std::string dd_manifest, dd_out;
  dd->add_option("--manifest", dd_manifest, "manifest CSV")->required();
  dd->add_option("--out", dd_out, "write the report CSV here (default stdout)");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "finite-difference gradient verification");
  std::uint64_t gc_seed = 7;
  double gc_step = 1e-5;
  bool gc_nocf = false;
  long gc_max_entries = 0;
  gc->add_option("--seed", gc_seed, "seed for parameters and inputs");
  gc->add_option("--fd-step", gc_step, "central-difference step");
  gc->add_flag("--no-cf", gc_nocf, "disable the counterfactual terms");
  gc->add_option("--max-entries", gc_max_entries,
                 "check at most this many entries per tensor (0 = all)");

  // config
  auto* cf = app.add_subcommand("config", "configuration utilities");
  std::string cf_action = "show";
  CommonOverrides cf_common;
  cf->add_option("action", cf_action, "show");
  add_common(cf, cf_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // 0 = --help and friends; anything else is a usage error
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen)) {
      const DatasetManifest manifest =
          generate_dataset(gen_n, gen_seed, gen_out, scene, gen_split);
      std::printf("wrote %zu pairs under %s\n", manifest.entries.size(), gen_out.c_str());
      return 0;
    }

    if (app.got_subcommand(tr)) {
      RunConfig cfg = assemble(tr_common);
      if (!tr_manifest.empty()) cfg.paths.train_manifest = tr_manifest;
      if (!tr_out.empty()) cfg.paths.out_dir = tr_out;
      if (tr_epochs > 0) cfg.train.epochs = tr_epochs;
      if (tr_batch > 0) cfg.train.batch_size = tr_batch;
      if (tr_max_steps >= 0) cfg.train.max_steps = tr_max_steps;
      if (tr_lr > 0) cfg.train.learning_rate = tr_lr;
      if (tr_polar->count()) cfg.train.use_polar_transform = true;
      if (tr_nopolar->count()) cfg.train.use_polar_transform = false;
      if (tr_cf->count()) cfg.train.cf_enabled = true;
      if (tr_nocf->count()) cfg.train.cf_enabled = false;
      if (cfg.paths.train_manifest.empty())
        throw std::invalid_argument("no training manifest given (--manifest or paths.train_manifest)");

      const DatasetManifest manifest = read_manifest(cfg.paths.train_manifest);
      const TrainResult result = train(cfg.train, manifest, cfg.paths.out_dir);
      std::printf("steps %ld  initial loss %.6f  final loss %.6f\n", result.steps,
                  result.initial_loss, result.final_loss);
      if (result.best_val_r1 >= 0)
        std::printf("best validation R@1 %.4f\n", result.best_val_r1);
      std::printf("final checkpoint: %s\n", result.final_checkpoint.c_str());
      std::printf("metrics: %s\n", result.metrics_csv.c_str());

      if (!cfg.paths.eval_manifest.empty()) {
        Checkpoint ck = load_checkpoint(result.final_checkpoint);
        print_recalls(evaluate_model(ck.model, read_manifest(cfg.paths.eval_manifest),
                                     cfg.train.deterministic));
      }
      return 0;
    }

    if (app.got_subcommand(ev)) {
      if (ev_embeddings.empty() && (ev_ckpt.empty() || ev_manifest.empty())) {
        std::fprintf(stderr, "eval needs --checkpoint and --manifest, or --embeddings\n");
        return 1;
      }

      if (!ev_embeddings.empty()) {
        // offline retrieval over an exported container
        std::map<int, Vec> ground, aerial;
        for (const auto& t : read_tensor_container(ev_embeddings)) {
          const auto slash = t.name.find('/');
          if (slash == std::string::npos)
            throw std::runtime_error("unexpected record name " + t.name);
          Vec v(t.data.size());
          for (size_t i = 0; i < t.data.size(); ++i) v(i) = t.data[i];
          const int id = std::stoi(t.name.substr(slash + 1));
          (t.name.rfind("ground/", 0) == 0 ? ground : aerial)[id] = std::move(v);
        }
        if (ground.size() != aerial.size() || ground.empty())
          throw std::runtime_error("embedding container is incomplete");
        std::vector<Vec> fg, fa;
        for (const auto& [id, v] : ground) {
          fg.push_back(v);
          fa.push_back(aerial.at(id));
        }
        const Recalls r = standard_recalls(distance_matrix(fg, fa));
        print_recalls(r);
        if (!ev_csv.empty()) write_recalls_csv(ev_csv, r);
        return 0;
      }

      Checkpoint ck = load_checkpoint(ev_ckpt);
      const DatasetManifest manifest = read_manifest(ev_manifest);
      const std::vector<LoadedPair> pairs = load_pairs(manifest);
      const Recalls recalls = evaluate_pairs(ck.model, pairs, ev_det);
      print_recalls(recalls);
      if (!ev_csv.empty()) write_recalls_csv(ev_csv, recalls);

      if (!ev_export.empty()) {
        std::vector<NamedTensor> records;
        for (const LoadedPair& pair : pairs) {
          const BatchItemInput input = prepare_input(ck.model, pair.ground, pair.aerial);
          for (Branch b : {Branch::ground, Branch::aerial}) {
            const Vec f = embed_image(b == Branch::ground ? input.ground : input.aerial,
                                      ck.model.branch(b), ck.model.config(), b, false,
                                      nullptr, nullptr)
                              .data;
            NamedTensor t;
            t.name = std::string(branch_name(b)) + "/" + std::to_string(pair.id);
            t.dtype = 1;
            t.dims = {static_cast<std::uint32_t>(f.size())};
            t.data.assign(f.data(), f.data() + f.size());
            records.push_back(std::move(t));
          }
        }
        write_tensor_container(ev_export, records);
        std::printf("embeddings: %s\n", ev_export.c_str());
      }
      return 0;
    }

    if (app.got_subcommand(aug)) {
      const DatasetManifest manifest = read_manifest(aug_manifest);
      const AugmentConfig cfg = AugmentConfig::from_levels(
          augment_level_from_string(aug_layout), augment_level_from_string(aug_semantic),
          aug_seed);
      fs::create_directories(aug_out);

      DatasetManifest out_manifest = manifest;
      out_manifest.base_dir = aug_out;
      for (size_t i = 0; i < manifest.entries.size(); ++i) {
        const Image aerial = read_png(manifest.aerial_file(i), View::aerial);
        const Image ground = read_png(manifest.ground_file(i), View::panorama);
        const std::uint64_t item_seed =
            derive_seed(aug_seed, {static_cast<std::uint64_t>(manifest.entries[i].id)});
        Rng layout_rng(derive_seed(item_seed, {0}));
        auto [a, g] = layout_simulate(aerial, ground, cfg, layout_rng);
        Rng sem_a(derive_seed(item_seed, {1}));
        Rng sem_g(derive_seed(item_seed, {2}));
        a = semantic_augment(a, cfg, sem_a);
        g = semantic_augment(g, cfg, sem_g);
        write_png(out_manifest.aerial_file(i), a);
        write_png(out_manifest.ground_file(i), g);
      }
      write_manifest(out_manifest, (fs::path(aug_out) / "manifest.csv").string());
      std::printf("augmented %zu pairs into %s\n", manifest.entries.size(), aug_out.c_str());
      return 0;
    }

    if (app.got_subcommand(vz)) {
      Checkpoint ck = load_checkpoint(vz_ckpt);
      const DatasetManifest manifest = read_manifest(vz_manifest);
      if (vz_index < 0 || vz_index >= static_cast<int>(manifest.entries.size()))
        throw std::invalid_argument("pair index out of range");
      const Image aerial = read_png(manifest.aerial_file(vz_index), View::aerial);
      const Image ground = read_png(manifest.ground_file(vz_index), View::panorama);
      const BatchItemInput input = prepare_input(ck.model, ground, aerial);
      fs::create_directories(vz_out);
      const std::string prefix =
          (fs::path(vz_out) / ("viz_" + std::to_string(manifest.entries[vz_index].id)))
              .string();
      write_descriptor_panels(ck.model, input.ground, input.aerial, prefix);
      std::printf("wrote %s_{ground,aerial,diff}.png\n", prefix.c_str());
      return 0;
    }

    if (app.got_subcommand(dd)) {
      const DedupReport report = dedup_pairs(read_manifest(dd_manifest));
      std::string text = "hash,kept,removed\n";
      for (const auto& g : report.groups) {
        text += g.hash + "," + std::to_string(g.kept_id) + ",";
        for (size_t i = 0; i < g.removed_ids.size(); ++i)
          text += (i ? ";" : "") + std::to_string(g.removed_ids[i]);
        text += "\n";
      }
      if (dd_out.empty()) {
        std::printf("scanned %d pairs, %zu duplicate groups\n", report.pairs_scanned,
                    report.groups.size());
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(dd_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + dd_out);
        out << text;
        std::printf("scanned %d pairs, %zu duplicate groups -> %s\n",
                    report.pairs_scanned, report.groups.size(), dd_out.c_str());
      }
      return 0;
    }

    if (app.got_subcommand(gc)) {
      GradCheckConfig cfg = GradCheckConfig::tiny();
      cfg.seed = gc_seed;
      cfg.fd_step = gc_step;
      cfg.loss.cf_enabled = !gc_nocf;
      cfg.max_entries_per_tensor = gc_max_entries;
      const GradCheckReport report = grad_check(cfg);
      std::printf("%-42s %10s %14s %14s %s\n", "tensor", "shape", "max rel err",
                  "max abs err", "cf-grad");
      for (const auto& row : report.rows) {
        char shape[24];
        std::snprintf(shape, sizeof(shape), "%ldx%ld", row.rows, row.cols);
        std::printf("%-42s %10s %14.3e %14.3e %s\n", row.name.c_str(), shape,
                    row.max_rel_err, row.max_abs_err,
                    row.cf_grad_zero ? "zero" : "nonzero");
      }
      std::printf("checked %ld parameters, fd step %.1e, overall max rel err %.3e\n",
                  report.params_checked, report.fd_step, report.max_rel_err);
      return 0;
    }

    if (app.got_subcommand(cf)) {
      if (cf_action != "show") {
        std::fprintf(stderr, "unknown config action '%s' (expected: show)\n",
                     cf_action.c_str());
        return 1;
      }
      const RunConfig cfg = assemble(cf_common);
      std::printf("%s\n", cfg.to_json().dump(2).c_str());
      return 0;
    }

    throw std::logic_error("no subcommand dispatched");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
