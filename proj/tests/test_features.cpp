#include "geodtr/features.hpp"
#include "geodtr/training.hpp"

#include <doctest.h>

using namespace geodtr;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img = Image::zeros(h, w, View::panorama);
  for (auto& p : img.plane)
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
  return img;
}

Mat random_features(int c, int hw, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(c, hw);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("backbone zero parameters map zero input to zero features") {
  ModelConfig cfg;
  cfg.channels = 8;
  BackboneParams params;
  Rng rng(1);
  params.init(cfg.channels, rng);
  for (auto& layer : params.conv) layer.weight.v.setZero();

  const Image img = Image::zeros(32, 64, View::panorama);
  const RawFeatures r = backbone_forward(img, params, cfg, Branch::ground, nullptr);
  CHECK(r.data.rows() == 8);
  CHECK(r.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backbone shape contract and determinism") {
  ModelConfig cfg;
  cfg.channels = 32;
  BackboneParams params;
  Rng rng(2);
  params.init(cfg.channels, rng);

  const Image img = random_image(64, 256, 3);
  const RawFeatures r = backbone_forward(img, params, cfg, Branch::ground, nullptr);
  CHECK(r.data.rows() == 32);
  CHECK(r.grid.h == 4);
  CHECK(r.grid.w == 16);
  CHECK(r.data.cols() == 64);

  const RawFeatures again = backbone_forward(img, params, cfg, Branch::ground, nullptr);
  CHECK((r.data - again.data).cwiseAbs().maxCoeff() == 0.0);

  const Image bad = Image::zeros(30, 64, View::panorama);
  CHECK_THROWS_AS(backbone_forward(bad, params, cfg, Branch::ground, nullptr),
                  std::invalid_argument);
}

TEST_CASE("saliency map equals the channel max") {
  Mat f(2, 2);
  f << 1, 0, 0, 2;  // position 0: (1,0); position 1: (0,2)
  const Vec m = saliency_map(f);
  CHECK(m(0) == 1.0);
  CHECK(m(1) == 2.0);

  const Mat single = random_features(1, 6, 4);
  CHECK((saliency_map(single).transpose() - single.row(0)).cwiseAbs().maxCoeff() == 0.0);

  // brute-force loop oracle on a random 3 x (2*2) tensor
  const Mat r = random_features(3, 4, 5);
  const Vec sm = saliency_map(r);
  for (int s = 0; s < 4; ++s) {
    double best = r(0, s);
    for (int c = 1; c < 3; ++c) best = std::max(best, r(c, s));
    CHECK(sm(s) == best);
    for (int c = 0; c < 3; ++c) CHECK(sm(s) >= r(c, s));
  }
}

TEST_CASE("index map normalizes the argmax channel") {
  Mat f(2, 2);
  f << 1, 0, 0, 2;
  const Vec idx = index_map(f);
  CHECK(idx(0) == 0.0);
  CHECK(idx(1) == 0.5);

  // ties break to the lowest channel index
  Mat tie = Mat::Constant(3, 2, 0.7);
  CHECK(index_map(tie).cwiseAbs().maxCoeff() == 0.0);

  const Mat r = random_features(5, 8, 6);
  const Vec im = index_map(r);
  for (int s = 0; s < 8; ++s) {
    int best = 0;
    for (int c = 1; c < 5; ++c)
      if (r(c, s) > r(best, s)) best = c;
    CHECK(im(s) == doctest::Approx(best / 5.0).epsilon(1e-15));
    // codomain {0, 1/C, ..., (C-1)/C}
    CHECK(im(s) >= 0.0);
    CHECK(im(s) < 1.0);
    CHECK(std::abs(im(s) * 5.0 - std::round(im(s) * 5.0)) < 1e-12);
  }
}

TEST_CASE("backbone gradients match central finite differences") {
  ModelConfig cfg;
  cfg.channels = 4;
  BackboneParams params;
  Rng rng(7);
  params.init(cfg.channels, rng);

  const Image img = random_image(16, 16, 8);

  // scalar objective: fixed random weighting of the feature tensor
  Mat w = random_features(cfg.channels, 1, 9);
  const auto objective = [&]() {
    const RawFeatures r = backbone_forward(img, params, cfg, Branch::ground, nullptr);
    return (w.transpose() * r.data).sum();
  };

  BackboneCache cache;
  const RawFeatures r = backbone_forward(img, params, cfg, Branch::ground, &cache);
  Mat dfeat = Mat::Zero(r.data.rows(), r.data.cols());
  dfeat.colwise() = w.col(0);
  for (auto& layer : params.conv) {
    layer.weight.zero_grad();
    layer.bias.zero_grad();
  }
  backbone_backward(dfeat, params, cache);

  const double h = 1e-5;
  double worst = 0.0;
  for (auto& layer : params.conv) {
    for (Tensor* t : {&layer.weight, &layer.bias}) {
      for (Eigen::Index i = 0; i < t->v.size(); ++i) {
        double& theta = t->v.data()[i];
        const double saved = theta;
        theta = saved + h;
        const double up = objective();
        theta = saved - h;
        const double down = objective();
        theta = saved;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, relative_error(t->g.data()[i], fd));
      }
    }
  }
  CHECK(worst <= 1e-3);
}
