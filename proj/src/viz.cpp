#include "geodtr/viz.hpp"

#include "geodtr/png_io.hpp"

#include <cmath>

namespace geodtr {

namespace {

constexpr int kScale = 16;  // nearest-neighbor upscaling per grid cell
constexpr int kGap = 2;

std::vector<Arr> descriptor_planes(const Mat& p, Grid grid) {
  std::vector<Arr> maps(p.rows());
  for (Eigen::Index m = 0; m < p.rows(); ++m) {
    Arr plane(grid.h, grid.w);
    for (int r = 0; r < grid.h; ++r)
      for (int c = 0; c < grid.w; ++c) plane(r, c) = p(m, r * grid.w + c);
    maps[m] = std::move(plane);
  }
  return maps;
}

Image tile_grayscale(const std::vector<Arr>& maps) {
  const int h = static_cast<int>(maps[0].rows());
  const int w = static_cast<int>(maps[0].cols());
  const int k = static_cast<int>(maps.size());
  Image out = Image::constant(h * kScale, k * (w * kScale + kGap) - kGap,
                              View::panorama, 1.0);
  for (int m = 0; m < k; ++m) {
    const double lo = maps[m].minCoeff();
    const double hi = maps[m].maxCoeff();
    const double span = hi - lo > 1e-12 ? hi - lo : 1.0;
    const int x0 = m * (w * kScale + kGap);
    for (int r = 0; r < h * kScale; ++r)
      for (int c = 0; c < w * kScale; ++c) {
        const double v = (maps[m](r / kScale, c / kScale) - lo) / span;
        for (int ch = 0; ch < 3; ++ch) out.plane[ch](r, x0 + c) = v;
      }
  }
  return out;
}

Image tile_diverging(const std::vector<Arr>& maps) {
  double peak = 1e-12;
  for (const Arr& m : maps) peak = std::max(peak, m.abs().maxCoeff());
  const int h = static_cast<int>(maps[0].rows());
  const int w = static_cast<int>(maps[0].cols());
  const int k = static_cast<int>(maps.size());
  Image out = Image::constant(h * kScale, k * (w * kScale + kGap) - kGap,
                              View::panorama, 1.0);
  for (int m = 0; m < k; ++m) {
    const int x0 = m * (w * kScale + kGap);
    for (int r = 0; r < h * kScale; ++r)
      for (int c = 0; c < w * kScale; ++c) {
        const double v = maps[m](r / kScale, c / kScale) / peak;  // [-1, 1]
        // blue (negative) .. white (zero) .. red (positive)
        const double mag = std::min(std::abs(v), 1.0);
        double red = 1.0, green = 1.0 - mag, blue = 1.0;
        if (v >= 0)
          blue = 1.0 - mag;
        else
          red = 1.0 - mag;
        out.plane[0](r, x0 + c) = red;
        out.plane[1](r, x0 + c) = green;
        out.plane[2](r, x0 + c) = blue;
      }
  }
  return out;
}

}  // namespace

void write_descriptor_panels(GeoDtr& model, const Image& ground_in,
                             const Image& aerial_in, const std::string& prefix) {
  Mat pg, pa;
  embed_image(ground_in, model.branch(Branch::ground), model.config(), Branch::ground,
              false, nullptr, nullptr, &pg);
  embed_image(aerial_in, model.branch(Branch::aerial), model.config(), Branch::aerial,
              false, nullptr, nullptr, &pa);

  const Grid gg = model.branch(Branch::ground).grid;
  const Grid ga = model.branch(Branch::aerial).grid;
  const std::vector<Arr> ground_maps = descriptor_planes(pg, gg);
  const std::vector<Arr> aerial_maps = descriptor_planes(pa, ga);

  std::vector<Arr> aligned = aerial_maps;
  if (!(gg == ga)) {
    // unroll the square aerial descriptor grid onto the ground grid
    for (auto& m : aligned) {
      Arr dst(gg.h, gg.w);
      polar_resample_plane(m, dst);
      m = std::move(dst);
    }
  }
  std::vector<Arr> diff(ground_maps.size());
  for (size_t m = 0; m < diff.size(); ++m) diff[m] = ground_maps[m] - aligned[m];

  write_png(prefix + "_ground.png", tile_grayscale(ground_maps));
  write_png(prefix + "_aerial.png", tile_grayscale(aerial_maps));
  write_png(prefix + "_diff.png", tile_diverging(diff));
}

}  // namespace geodtr
