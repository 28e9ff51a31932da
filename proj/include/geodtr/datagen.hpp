#pragma once

#include "geodtr/image.hpp"
#include "geodtr/rng.hpp"

#include <string>
#include <vector>

namespace geodtr {

struct SceneConfig {
  int aerial_size = 64;
  int ground_height = 32;
  int ground_width = 128;
  double noise_sigma = 0.05;
  double brightness_range = 0.1;  // ground brightness offset ~ U[-b, b]

  void validate() const;
};

/// One matched pair: a procedurally rendered aerial view and its polar
/// transform with optional view-dependent photometric noise. With
/// noise_sigma == 0 and brightness_range == 0 the ground image equals
/// polar_transform(aerial) exactly.
struct ScenePair {
  Image aerial;
  Image ground;
  int id = 0;
  std::uint64_t seed = 0;
};

struct ManifestEntry {
  int id = 0;
  std::string aerial_path;
  std::string ground_path;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string split;
  std::uint64_t global_seed = 0;
  std::string base_dir;  // directory the paths are relative to

  std::string aerial_file(size_t i) const;
  std::string ground_file(size_t i) const;
};

ScenePair generate_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Renders n pairs as 8-bit PNG plus a `manifest.csv` with header
/// `id,aerial,ground,seed`. Per-item seeds derive from the global seed.
DatasetManifest generate_dataset(int n, std::uint64_t seed,
                                 const std::string& out_dir, const SceneConfig& cfg,
                                 const std::string& split = "train");

DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);

struct DuplicateGroup {
  std::string hash;
  int kept_id = 0;
  std::vector<int> removed_ids;
};

struct DedupReport {
  std::vector<DuplicateGroup> groups;
  int pairs_scanned = 0;

  std::vector<int> removed_ids() const;
};

/// Content hash (md5 over the concatenated 8-bit RGB bytes of aerial and
/// ground) per pair; groups of identical hashes are reported with the
/// lowest id kept.
DedupReport dedup_pairs(const DatasetManifest& manifest);

/// md5 of one pair's pixel content, exposed for tests.
std::string pair_content_hash(const Image& aerial, const Image& ground);

}  // namespace geodtr
