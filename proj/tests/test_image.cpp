#include "geodtr/image.hpp"
#include "geodtr/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace geodtr;

namespace {

Image random_aerial(int size, std::uint64_t seed) {
  Rng rng(seed);
  Image img = Image::zeros(size, size, View::aerial);
  for (auto& p : img.plane)
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
  return img;
}

double max_abs_diff(const Image& a, const Image& b) {
  double worst = 0.0;
  for (int ch = 0; ch < 3; ++ch)
    worst = std::max(worst, (a.plane[ch] - b.plane[ch]).abs().maxCoeff());
  return worst;
}

std::vector<double> sorted_pixels(const Image& img) {
  std::vector<double> v;
  for (const auto& p : img.plane) v.insert(v.end(), p.data(), p.data() + p.size());
  std::sort(v.begin(), v.end());
  return v;
}

Image pano_of_columns(const std::vector<double>& cols) {
  Image img = Image::zeros(2, static_cast<int>(cols.size()), View::panorama);
  for (auto& p : img.plane)
    for (int c = 0; c < img.width; ++c) p.col(c).setConstant(cols[c]);
  return img;
}

std::vector<double> column_values(const Image& img) {
  std::vector<double> v(img.width);
  for (int c = 0; c < img.width; ++c) v[c] = img.plane[0](0, c);
  return v;
}

}  // namespace

TEST_CASE("rotate_aerial 2x2 quarter turn") {
  Image img = Image::zeros(2, 2, View::aerial);
  // [[a,b],[c,d]] stored in every channel
  const double a = 0.1, b = 0.2, c = 0.3, d = 0.4;
  for (auto& p : img.plane) {
    p(0, 0) = a;
    p(0, 1) = b;
    p(1, 0) = c;
    p(1, 1) = d;
  }
  const Image out = rotate_aerial(img, 90);
  CHECK(out.plane[0](0, 0) == b);
  CHECK(out.plane[0](0, 1) == d);
  CHECK(out.plane[0](1, 0) == a);
  CHECK(out.plane[0](1, 1) == c);
}

TEST_CASE("rotation group identities") {
  const Image img = random_aerial(8, 11);
  Image four = img;
  for (int i = 0; i < 4; ++i) four = rotate_aerial(four, 90);
  CHECK(max_abs_diff(four, img) == 0.0);

  // rot180 == horizontal flip composed with vertical flip
  const Image r180 = rotate_aerial(img, 180);
  Image hv = flip_aerial(img);
  for (int ch = 0; ch < 3; ++ch) hv.plane[ch] = hv.plane[ch].colwise().reverse().eval();
  CHECK(max_abs_diff(r180, hv) == 0.0);

  CHECK(max_abs_diff(rotate_aerial(rotate_aerial(img, 90), 180),
                     rotate_aerial(img, 270)) == 0.0);
}

TEST_CASE("flip_aerial is a mirror and involution") {
  Image img = Image::zeros(2, 2, View::aerial);
  for (auto& p : img.plane) {
    p(0, 0) = 1;
    p(0, 1) = 2;
    p(1, 0) = 3;
    p(1, 1) = 4;
  }
  const Image out = flip_aerial(img);
  CHECK(out.plane[0](0, 0) == 2);
  CHECK(out.plane[0](0, 1) == 1);
  CHECK(out.plane[0](1, 0) == 4);
  CHECK(out.plane[0](1, 1) == 3);
  CHECK(max_abs_diff(flip_aerial(out), img) == 0.0);

  const Image rnd = random_aerial(6, 3);
  CHECK(sorted_pixels(flip_aerial(rnd)) == sorted_pixels(rnd));
  CHECK(sorted_pixels(rotate_aerial(rnd, 90)) == sorted_pixels(rnd));
}

TEST_CASE("shift_panorama cyclic behaviour") {
  const Image img = pano_of_columns({0.0, 0.25, 0.5, 0.75});
  CHECK(column_values(shift_panorama(img, 1)) ==
        std::vector<double>{0.75, 0.0, 0.25, 0.5});
  CHECK(max_abs_diff(shift_panorama(img, 4), img) == 0.0);
  CHECK(max_abs_diff(shift_panorama(shift_panorama(img, 3), -3), img) == 0.0);
}

TEST_CASE("flip_panorama keeps column zero fixed") {
  const Image img = pano_of_columns({0.0, 0.25, 0.5, 0.75});
  CHECK(column_values(flip_panorama(img)) ==
        std::vector<double>{0.0, 0.75, 0.5, 0.25});
  CHECK(max_abs_diff(flip_panorama(flip_panorama(img)), img) == 0.0);
}

TEST_CASE("polar transform of a constant image is constant") {
  const Image img = Image::constant(16, 16, View::aerial, 0.5);
  const Image out = polar_transform(img, 8, 32);
  CHECK(out.view == View::panorama);
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(out.plane[ch].minCoeff() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.plane[ch].maxCoeff() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("polar transform bottom row samples the center") {
  const int s = 33;
  Image img = Image::zeros(s, s, View::aerial);
  img.plane[0](16, 16) = 1.0;  // red pixel at the exact center
  const int th = 64, tw = 64;
  const Image out = polar_transform(img, th, tw);

  // direct evaluation of the sampling formula at h = th - 1
  const double radius = (s / 2.0) * 1.0 / th;
  for (int w = 0; w < tw; ++w) {
    const double az = 2.0 * 3.14159265358979323846 * w / tw;
    const double row = 16.0 - radius * std::cos(az);
    const double col = 16.0 + radius * std::sin(az);
    const double expect = bilinear_sample(img.plane[0], row, col);
    CHECK(out.plane[0](th - 1, w) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(out.plane[0](th - 1, w) > 0.5);  // approximately red
  }
  // top row reads the outer ring, far from the center pixel
  CHECK(out.plane[0].row(0).abs().maxCoeff() == 0.0);
}

TEST_CASE("polar transform commutes with quarter rotations and flips") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const Image img = random_aerial(64, seed);
    const Image pol = polar_transform(img, 32, 128);

    for (int theta : {90, 180, 270}) {
      const Image lhs = polar_transform(rotate_aerial(img, theta), 32, 128);
      const Image rhs = shift_panorama(pol, panorama_shift_for_rotation(theta, 128));
      CHECK(max_abs_diff(lhs, rhs) <= 1e-5);
    }
    const Image lhs = polar_transform(flip_aerial(img), 32, 128);
    const Image rhs = flip_panorama(pol);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-5);
  }
}

TEST_CASE("imaging error contracts") {
  Image rect = Image::zeros(4, 8, View::aerial);
  CHECK_THROWS_AS(polar_transform(rect, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(rotate_aerial(rect, 90), std::invalid_argument);

  Image sq = Image::zeros(4, 4, View::aerial);
  CHECK_THROWS_AS(polar_transform(sq, 1, 8), std::invalid_argument);
  CHECK_THROWS_AS(polar_transform(sq, 8, 0), std::invalid_argument);
  CHECK_THROWS_AS(rotate_aerial(sq, 45), std::invalid_argument);

  Image pano = Image::zeros(4, 8, View::panorama);
  CHECK_THROWS_AS(polar_transform(pano, 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(flip_aerial(pano), std::invalid_argument);
  CHECK_THROWS_AS(shift_panorama(sq, 1), std::invalid_argument);
  CHECK_THROWS_AS(flip_panorama(sq), std::invalid_argument);
}
