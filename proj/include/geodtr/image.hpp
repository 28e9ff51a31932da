#pragma once

#include "geodtr/types.hpp"

#include <array>

namespace geodtr {

/// RGB raster with values in [0, 1], indexed (row, col) per channel plane.
/// Aerial images are square; panoramas wrap horizontally in azimuth.
struct Image {
  int height = 0;
  int width = 0;
  View view = View::aerial;
  std::array<Arr, 3> plane;

  static Image zeros(int h, int w, View v);
  static Image constant(int h, int w, View v, double value);

  double& at(int ch, int r, int c) { return plane[ch](r, c); }
  double at(int ch, int r, int c) const { return plane[ch](r, c); }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }
  void clamp01();
};

/// Bilinear sample with clamp-to-edge handling at the borders.
double bilinear_sample(const Arr& plane, double row, double col);

/// Resamples a square top-down view into a panorama-like strip.
/// Output row h reads radius (S/2)*(H_t-h)/H_t from the grid center
/// ((S-1)/2, (S-1)/2); row 0 is the outer ring. Output column w reads
/// azimuth 2*pi*w/W_t clockwise from north (image up). Bilinear sampling.
void polar_resample_plane(const Arr& src, Arr& dst);
Image polar_transform(const Image& aerial, int target_height, int target_width);

/// Exact counter-clockwise pixel permutation; theta in {90, 180, 270}.
Image rotate_aerial(const Image& aerial, int theta_degrees);

/// Left-right mirror, exact permutation.
Image flip_aerial(const Image& aerial);

/// Circular column shift: output column w = input column (w - s) mod W.
Image shift_panorama(const Image& pano, int shift);

/// Azimuth reversal keeping column 0 (north) fixed:
/// output column w = input column (W - w) mod W.
Image flip_panorama(const Image& pano);

/// Column shift that makes polar_transform commute with a CCW rotation:
/// polar(rotate(A, theta)) == shift_panorama(polar(A), s(theta)).
/// Requires 4 | width for the shift to be integral.
int panorama_shift_for_rotation(int theta_degrees, int width);

}  // namespace geodtr
