#include "geodtr/augment.hpp"

#include <algorithm>
#include <cmath>

namespace geodtr {

AugmentLevel augment_level_from_string(const std::string& s) {
  if (s == "none") return AugmentLevel::none;
  if (s == "weak") return AugmentLevel::weak;
  if (s == "strong") return AugmentLevel::strong;
  throw std::invalid_argument("unknown augmentation level: " + s);
}

const char* augment_level_name(AugmentLevel level) {
  switch (level) {
    case AugmentLevel::none: return "none";
    case AugmentLevel::weak: return "weak";
    case AugmentLevel::strong: return "strong";
  }
  throw std::logic_error("bad augment level");
}

AugmentConfig AugmentConfig::from_levels(AugmentLevel layout, AugmentLevel semantic,
                                         std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.layout_level = layout;
  cfg.semantic_level = semantic;
  cfg.seed = seed;
  switch (semantic) {
    case AugmentLevel::none:
      break;
    case AugmentLevel::weak:
      cfg.jitter_strength = 0.1;
      cfg.grayscale_prob = 0.1;
      break;
    case AugmentLevel::strong:
      cfg.jitter_strength = 0.3;
      cfg.grayscale_prob = 0.2;
      cfg.posterize_prob = 0.2;
      cfg.posterize_bits = 4;
      cfg.blur_kernel_choices = {1, 3, 5};
      cfg.blur_sigma_lo = 0.1;
      cfg.blur_sigma_hi = 5.0;
      break;
  }
  return cfg;
}

void AugmentConfig::validate() const {
  if (grayscale_prob < 0 || grayscale_prob > 1 || posterize_prob < 0 || posterize_prob > 1)
    throw std::invalid_argument("augment probabilities must lie in [0, 1]");
  if (jitter_strength < 0 || jitter_strength >= 1)
    throw std::invalid_argument("jitter_strength must lie in [0, 1)");
  if (posterize_bits < 1 || posterize_bits > 8)
    throw std::invalid_argument("posterize_bits must lie in [1, 8]");
  for (int k : blur_kernel_choices)
    if (k < 1 || k % 2 == 0)
      throw std::invalid_argument("blur kernels must be odd and positive");
  if (blur_sigma_lo <= 0 || blur_sigma_hi < blur_sigma_lo)
    throw std::invalid_argument("bad blur sigma range");
}

double rec601_luma(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

double posterize_value(double x, int bits) {
  const int u8 = static_cast<int>(std::floor(std::clamp(x, 0.0, 1.0) * 255.0 + 0.5));
  const int mask = (0xff << (8 - bits)) & 0xff;
  return (u8 & mask) / 255.0;
}

Image gaussian_blur(const Image& img, int kernel, double sigma) {
  if (kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("blur kernel must be odd and positive");
  if (kernel == 1) return img;

  const int radius = kernel / 2;
  std::vector<double> weight(kernel);
  double sum = 0.0;
  for (int i = 0; i < kernel; ++i) {
    const double d = i - radius;
    weight[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += weight[i];
  }
  for (double& w : weight) w /= sum;

  const int h = img.height, w = img.width;
  Image tmp = img, out = img;
  // horizontal then vertical pass, clamp-to-edge
  for (int ch = 0; ch < 3; ++ch) {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int i = 0; i < kernel; ++i)
          acc += weight[i] * img.plane[ch](r, std::clamp(c + i - radius, 0, w - 1));
        tmp.plane[ch](r, c) = acc;
      }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int i = 0; i < kernel; ++i)
          acc += weight[i] * tmp.plane[ch](std::clamp(r + i - radius, 0, h - 1), c);
        out.plane[ch](r, c) = acc;
      }
  }
  return out;
}

std::pair<Image, Image> layout_simulate(const Image& aerial, const Image& ground,
                                        const AugmentConfig& cfg, Rng& rng) {
  if (aerial.view != View::aerial || ground.view != View::panorama)
    throw std::invalid_argument("layout_simulate expects an (aerial, panorama) pair");
  if (cfg.layout_level == AugmentLevel::none) return {aerial, ground};

  const bool do_flip = rng.bernoulli(0.5);
  int theta = 0;
  if (cfg.layout_level == AugmentLevel::strong) {
    static constexpr int kAngles[3] = {90, 180, 270};
    theta = kAngles[rng.uniform_int(3)];
  }

  Image a = aerial;
  Image g = ground;
  if (do_flip) {
    a = flip_aerial(a);
    g = flip_panorama(g);
  }
  if (theta != 0) {
    a = rotate_aerial(a, theta);
    g = shift_panorama(g, panorama_shift_for_rotation(theta, g.width));
  }
  return {std::move(a), std::move(g)};
}

namespace {

void to_grayscale(Image& img) {
  const Arr luma =
      0.299 * img.plane[0] + 0.587 * img.plane[1] + 0.114 * img.plane[2];
  for (auto& p : img.plane) p = luma;
}

}  // namespace

Image semantic_augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  Image out = img;

  if (cfg.jitter_strength > 0.0) {
    const double j = cfg.jitter_strength;
    const double brightness = rng.uniform(1.0 - j, 1.0 + j);
    const double contrast = rng.uniform(1.0 - j, 1.0 + j);
    const double saturation = rng.uniform(1.0 - j, 1.0 + j);

    for (auto& p : out.plane) p *= brightness;
    out.clamp01();

    const Arr luma =
        0.299 * out.plane[0] + 0.587 * out.plane[1] + 0.114 * out.plane[2];
    const double mean_luma = luma.mean();
    for (auto& p : out.plane) p = contrast * p + (1.0 - contrast) * mean_luma;
    out.clamp01();

    const Arr luma2 =
        0.299 * out.plane[0] + 0.587 * out.plane[1] + 0.114 * out.plane[2];
    for (auto& p : out.plane) p = saturation * p + (1.0 - saturation) * luma2;
    out.clamp01();
  }

  if (cfg.grayscale_prob > 0.0 && rng.bernoulli(cfg.grayscale_prob)) {
    to_grayscale(out);
    out.clamp01();
  }

  if (cfg.posterize_prob > 0.0 && rng.bernoulli(cfg.posterize_prob)) {
    for (auto& p : out.plane)
      p = p.unaryExpr([&](double x) { return posterize_value(x, cfg.posterize_bits); });
  }

  if (!cfg.blur_kernel_choices.empty()) {
    const int kernel =
        cfg.blur_kernel_choices[rng.uniform_int(cfg.blur_kernel_choices.size())];
    const double sigma = rng.uniform(cfg.blur_sigma_lo, cfg.blur_sigma_hi);
    out = gaussian_blur(out, kernel, sigma);
    out.clamp01();
  }

  return out;
}

}  // namespace geodtr
