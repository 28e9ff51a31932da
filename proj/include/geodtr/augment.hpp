#pragma once

#include "geodtr/image.hpp"
#include "geodtr/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace geodtr {

enum class AugmentLevel { none, weak, strong };

AugmentLevel augment_level_from_string(const std::string& s);
const char* augment_level_name(AugmentLevel level);

/// Augmentation parameters. The level presets fill the numeric fields;
/// semantic_augment consumes only the fields (blur applies when
/// blur_kernel_choices is non-empty, posterize/grayscale when their
/// probabilities are positive).
struct AugmentConfig {
  AugmentLevel layout_level = AugmentLevel::none;
  AugmentLevel semantic_level = AugmentLevel::none;
  double jitter_strength = 0.0;
  double grayscale_prob = 0.0;
  double posterize_prob = 0.0;
  int posterize_bits = 4;
  std::vector<int> blur_kernel_choices;  // odd sizes; 1 = identity
  double blur_sigma_lo = 0.1;
  double blur_sigma_hi = 5.0;
  std::uint64_t seed = 0;

  static AugmentConfig from_levels(AugmentLevel layout, AugmentLevel semantic,
                                   std::uint64_t seed);
  void validate() const;
};

double rec601_luma(double r, double g, double b);

/// Quantizes to the top `bits` bits of the 8-bit representation.
double posterize_value(double x, int bits);

Image gaussian_blur(const Image& img, int kernel, double sigma);

/// Synchronized flip/rotation of an aerial-ground pair. The ground view
/// receives the panorama operation that makes the pair commute with
/// polar_transform (flip_panorama for a flip, shift_panorama for a
/// rotation). Draw order: flip coin, then rotation angle.
std::pair<Image, Image> layout_simulate(const Image& aerial, const Image& ground,
                                        const AugmentConfig& cfg, Rng& rng);

/// Photometric perturbation: brightness scale, contrast blend toward mean
/// luma, saturation blend toward per-pixel luma (factors ~ U[1-j, 1+j] in
/// that order), then optional grayscale, posterize, Gaussian blur. Values
/// are clamped to [0, 1] after each stage.
Image semantic_augment(const Image& img, const AugmentConfig& cfg, Rng& rng);

}  // namespace geodtr
