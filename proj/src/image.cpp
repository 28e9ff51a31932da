#include "geodtr/image.hpp"

#include <algorithm>
#include <cmath>

namespace geodtr {

Image Image::zeros(int h, int w, View v) { return constant(h, w, v, 0.0); }

Image Image::constant(int h, int w, View v, double value) {
  if (h < 1 || w < 1) throw std::invalid_argument("image size must be positive");
  Image img;
  img.height = h;
  img.width = w;
  img.view = v;
  for (auto& p : img.plane) p = Arr::Constant(h, w, value);
  return img;
}

void Image::clamp01() {
  for (auto& p : plane) p = p.max(0.0).min(1.0);
}

double bilinear_sample(const Arr& plane, double row, double col) {
  const int h = static_cast<int>(plane.rows());
  const int w = static_cast<int>(plane.cols());
  const int r0 = static_cast<int>(std::floor(row));
  const int c0 = static_cast<int>(std::floor(col));
  const double fr = row - r0;
  const double fc = col - c0;
  auto at = [&](int r, int c) {
    r = std::clamp(r, 0, h - 1);
    c = std::clamp(c, 0, w - 1);
    return plane(r, c);
  };
  const double top = (1.0 - fc) * at(r0, c0) + fc * at(r0, c0 + 1);
  const double bot = (1.0 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c0 + 1);
  return (1.0 - fr) * top + fr * bot;
}

void polar_resample_plane(const Arr& src, Arr& dst) {
  const int size = static_cast<int>(src.rows());
  const int th = static_cast<int>(dst.rows());
  const int tw = static_cast<int>(dst.cols());
  const double cy = (size - 1) / 2.0;
  const double cx = (size - 1) / 2.0;
  const double two_pi = 6.283185307179586476925287;
  for (int h = 0; h < th; ++h) {
    const double radius = (size / 2.0) * (th - h) / th;
    for (int w = 0; w < tw; ++w) {
      const double azimuth = two_pi * w / tw;  // clockwise from north
      const double row = cy - radius * std::cos(azimuth);
      const double col = cx + radius * std::sin(azimuth);
      dst(h, w) = bilinear_sample(src, row, col);
    }
  }
}

Image polar_transform(const Image& aerial, int target_height, int target_width) {
  if (aerial.view != View::aerial)
    throw std::invalid_argument("polar_transform expects an aerial image");
  if (aerial.height != aerial.width)
    throw std::invalid_argument("polar_transform expects a square aerial image");
  if (target_height < 2 || target_width < 2)
    throw std::invalid_argument("polar_transform target size must be at least 2");

  Image out = Image::zeros(target_height, target_width, View::panorama);
  for (int ch = 0; ch < 3; ++ch)
    polar_resample_plane(aerial.plane[ch], out.plane[ch]);
  return out;
}

Image rotate_aerial(const Image& aerial, int theta_degrees) {
  if (aerial.view != View::aerial)
    throw std::invalid_argument("rotate_aerial expects an aerial image");
  if (aerial.height != aerial.width)
    throw std::invalid_argument("rotate_aerial expects a square image");
  if (theta_degrees != 90 && theta_degrees != 180 && theta_degrees != 270)
    throw std::invalid_argument("rotation angle must be one of {90, 180, 270}");

  const int n = aerial.height;
  Image out = Image::zeros(n, n, View::aerial);
  const int quarter_turns = theta_degrees / 90;
  for (int ch = 0; ch < 3; ++ch) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        int sr = r, sc = c;
        // out(r, c) = in(c, n-1-r) is one CCW quarter turn
        for (int t = 0; t < quarter_turns; ++t) {
          const int nr = sc;
          const int nc = n - 1 - sr;
          sr = nr;
          sc = nc;
        }
        out.plane[ch](r, c) = aerial.plane[ch](sr, sc);
      }
    }
  }
  return out;
}

Image flip_aerial(const Image& aerial) {
  if (aerial.view != View::aerial)
    throw std::invalid_argument("flip_aerial expects an aerial image");
  Image out = aerial;
  for (int ch = 0; ch < 3; ++ch)
    out.plane[ch] = aerial.plane[ch].rowwise().reverse();
  return out;
}

Image shift_panorama(const Image& pano, int shift) {
  if (pano.view != View::panorama)
    throw std::invalid_argument("shift_panorama expects a panorama");
  const int w = pano.width;
  const int s = ((shift % w) + w) % w;
  Image out = pano;
  for (int ch = 0; ch < 3; ++ch) {
    for (int c = 0; c < w; ++c)
      out.plane[ch].col(c) = pano.plane[ch].col((c - s + w) % w);
  }
  return out;
}

Image flip_panorama(const Image& pano) {
  if (pano.view != View::panorama)
    throw std::invalid_argument("flip_panorama expects a panorama");
  const int w = pano.width;
  Image out = pano;
  for (int ch = 0; ch < 3; ++ch) {
    for (int c = 0; c < w; ++c)
      out.plane[ch].col(c) = pano.plane[ch].col((w - c) % w);
  }
  return out;
}

int panorama_shift_for_rotation(int theta_degrees, int width) {
  if (theta_degrees % 90 != 0)
    throw std::invalid_argument("rotation angle must be a multiple of 90");
  if (width % 4 != 0)
    throw std::invalid_argument("panorama width must be divisible by 4");
  // CCW rotation by theta moves content at azimuth a to azimuth a - theta,
  // so the polar image shifts by -theta/360 * width columns.
  const int quarter = width / 4;
  const int turns = (theta_degrees / 90) % 4;
  return ((-turns * quarter) % width + width) % width;
}

}  // namespace geodtr
