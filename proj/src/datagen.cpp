#include "geodtr/datagen.hpp"

#include "geodtr/md5.hpp"
#include "geodtr/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace geodtr {

void SceneConfig::validate() const {
  if (aerial_size < 2 || ground_height < 2 || ground_width < 2)
    throw std::invalid_argument("scene sizes must be at least 2");
  if (noise_sigma < 0 || brightness_range < 0)
    throw std::invalid_argument("noise parameters must be nonnegative");
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

void blend_pixel(Image& img, int r, int c, const Rgb& color, double coverage) {
  if (coverage <= 0.0) return;
  coverage = std::min(coverage, 1.0);
  img.plane[0](r, c) = (1 - coverage) * img.plane[0](r, c) + coverage * color.r;
  img.plane[1](r, c) = (1 - coverage) * img.plane[1](r, c) + coverage * color.g;
  img.plane[2](r, c) = (1 - coverage) * img.plane[2](r, c) + coverage * color.b;
}

}  // namespace

ScenePair generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(seed, {0x5ce7e}));

  const int s = cfg.aerial_size;
  const double cy = (s - 1) / 2.0;
  const double cx = (s - 1) / 2.0;

  const Rgb background = random_color(rng, 0.15, 0.55);
  Image aerial = Image::zeros(s, s, View::aerial);
  for (int ch = 0; ch < 3; ++ch)
    aerial.plane[ch].setConstant(ch == 0 ? background.r
                                 : ch == 1 ? background.g
                                           : background.b);

  // straight bands through the center at random angles
  const int n_roads = 1 + static_cast<int>(rng.uniform_int(3));
  for (int i = 0; i < n_roads; ++i) {
    const double angle = rng.uniform(0.0, 3.141592653589793);
    const double half_width = rng.uniform(1.5, 3.5);
    const double base = rng.uniform(0.55, 0.85);
    const Rgb color{base, base, rng.uniform(0.5, 0.9)};
    const double dx = std::cos(angle), dy = std::sin(angle);
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < s; ++c) {
        const double dist = std::abs((c - cx) * dy - (r - cy) * dx);
        blend_pixel(aerial, r, c, color, half_width + 0.5 - dist);
      }
    }
  }

  // colored discs at random polar positions
  const int n_discs = 3 + static_cast<int>(rng.uniform_int(6));
  for (int i = 0; i < n_discs; ++i) {
    const double rho = rng.uniform(4.0, s / 2.0 - 4.0);
    const double phi = rng.uniform(0.0, 6.283185307179586);
    const double radius = rng.uniform(2.0, 6.0);
    const Rgb color = random_color(rng, 0.1, 0.95);
    const double oy = cy - rho * std::cos(phi);
    const double ox = cx + rho * std::sin(phi);
    const int lo_r = std::max(0, static_cast<int>(std::floor(oy - radius - 1)));
    const int hi_r = std::min(s - 1, static_cast<int>(std::ceil(oy + radius + 1)));
    const int lo_c = std::max(0, static_cast<int>(std::floor(ox - radius - 1)));
    const int hi_c = std::min(s - 1, static_cast<int>(std::ceil(ox + radius + 1)));
    for (int r = lo_r; r <= hi_r; ++r) {
      for (int c = lo_c; c <= hi_c; ++c) {
        const double dist = std::hypot(r - oy, c - ox);
        blend_pixel(aerial, r, c, color, radius + 0.5 - dist);
      }
    }
  }
  aerial.clamp01();

  Image ground = polar_transform(aerial, cfg.ground_height, cfg.ground_width);
  if (cfg.noise_sigma > 0 || cfg.brightness_range > 0) {
    const double offset = rng.uniform(-cfg.brightness_range, cfg.brightness_range);
    for (auto& p : ground.plane)
      for (Eigen::Index i = 0; i < p.size(); ++i)
        p.data()[i] += offset + cfg.noise_sigma * rng.normal();
    ground.clamp01();
  }

  ScenePair pair;
  pair.aerial = std::move(aerial);
  pair.ground = std::move(ground);
  pair.seed = seed;
  return pair;
}

std::string DatasetManifest::aerial_file(size_t i) const {
  return (fs::path(base_dir) / entries[i].aerial_path).string();
}

std::string DatasetManifest::ground_file(size_t i) const {
  return (fs::path(base_dir) / entries[i].ground_path).string();
}

DatasetManifest generate_dataset(int n, std::uint64_t seed,
                                 const std::string& out_dir, const SceneConfig& cfg,
                                 const std::string& split) {
  if (n < 1) throw std::invalid_argument("dataset size must be at least 1");
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + out_dir + ": " + ec.message());

  DatasetManifest manifest;
  manifest.split = split;
  manifest.global_seed = seed;
  manifest.base_dir = out_dir;
  manifest.entries.resize(n);

  for (int i = 0; i < n; ++i) {
    const std::uint64_t item_seed = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    ScenePair pair = generate_scene(item_seed, cfg);
    pair.id = i;

    ManifestEntry& entry = manifest.entries[i];
    entry.id = i;
    entry.seed = item_seed;
    char name[64];
    std::snprintf(name, sizeof(name), "pair_%05d_aerial.png", i);
    entry.aerial_path = name;
    std::snprintf(name, sizeof(name), "pair_%05d_ground.png", i);
    entry.ground_path = name;

    write_png(manifest.aerial_file(i), pair.aerial);
    write_png(manifest.ground_file(i), pair.ground);
  }

  write_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << "id,aerial,ground,seed\n";
  for (const auto& e : manifest.entries)
    out << e.id << ',' << e.aerial_path << ',' << e.ground_path << ',' << e.seed << '\n';
  if (!out) throw std::runtime_error("manifest write failed: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);

  DatasetManifest manifest;
  manifest.base_dir = fs::path(path).parent_path().string();

  std::string line;
  if (!std::getline(in, line) || line != "id,aerial,ground,seed")
    throw std::runtime_error("bad manifest header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ManifestEntry e;
    std::string field;
    if (!std::getline(row, field, ',')) throw std::runtime_error("bad manifest row: " + line);
    e.id = std::stoi(field);
    if (!std::getline(row, e.aerial_path, ','))
      throw std::runtime_error("bad manifest row: " + line);
    if (!std::getline(row, e.ground_path, ','))
      throw std::runtime_error("bad manifest row: " + line);
    if (!std::getline(row, field, ',')) throw std::runtime_error("bad manifest row: " + line);
    e.seed = std::stoull(field);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string pair_content_hash(const Image& aerial, const Image& ground) {
  std::vector<unsigned char> bytes = to_rgb8(aerial);
  const std::vector<unsigned char> g = to_rgb8(ground);
  bytes.insert(bytes.end(), g.begin(), g.end());
  return md5_hex(bytes);
}

std::vector<int> DedupReport::removed_ids() const {
  std::vector<int> out;
  for (const auto& g : groups)
    out.insert(out.end(), g.removed_ids.begin(), g.removed_ids.end());
  std::sort(out.begin(), out.end());
  return out;
}

DedupReport dedup_pairs(const DatasetManifest& manifest) {
  DedupReport report;
  report.pairs_scanned = static_cast<int>(manifest.entries.size());

  std::map<std::string, std::vector<int>> by_hash;
  std::map<std::string, int> order;
  int next = 0;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const Image aerial = read_png(manifest.aerial_file(i), View::aerial);
    const Image ground = read_png(manifest.ground_file(i), View::panorama);
    const std::string hash = pair_content_hash(aerial, ground);
    if (!by_hash.count(hash)) order[hash] = next++;
    by_hash[hash].push_back(manifest.entries[i].id);
  }

  std::vector<const std::string*> hashes(order.size());
  for (const auto& [hash, idx] : order) hashes[idx] = &hash;
  for (const std::string* hash : hashes) {
    auto& ids = by_hash[*hash];
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    DuplicateGroup group;
    group.hash = *hash;
    group.kept_id = ids.front();
    group.removed_ids.assign(ids.begin() + 1, ids.end());
    report.groups.push_back(std::move(group));
  }
  return report;
}

}  // namespace geodtr
