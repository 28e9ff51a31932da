#include "geodtr/losses.hpp"

#include <doctest.h>

#include <cmath>

using namespace geodtr;

namespace {

Vec random_unit(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v / v.norm();
}

// enumerate all 2N(N-1) directed triplets explicitly
double enumeration_oracle(const std::vector<Vec>& g, const std::vector<Vec>& a,
                          double alpha) {
  const int n = static_cast<int>(g.size());
  double sum = 0;
  int count = 0;
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      if (j == m) continue;
      sum += std::log(1.0 + std::exp(alpha * ((g[m] - a[m]).norm() - (g[m] - a[j]).norm())));
      sum += std::log(1.0 + std::exp(alpha * ((a[m] - g[m]).norm() - (a[m] - g[j]).norm())));
      count += 2;
    }
  }
  CHECK(count == 2 * n * (n - 1));
  return sum / count;
}

}  // namespace

TEST_CASE("triplet loss closed forms") {
  CHECK(triplet_loss(0.7, 0.7, 10.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(triplet_loss(0.0, 1.0, 10.0) ==
        doctest::Approx(std::log(1.0 + std::exp(-10.0))).epsilon(1e-12));
  CHECK(triplet_loss(0.6, 0.5, 10.0) ==
        doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-12));
  CHECK_THROWS_AS(triplet_loss(-0.1, 0.5, 10.0), std::invalid_argument);
}

TEST_CASE("triplet loss is monotone in both distances") {
  double prev = triplet_loss(0.0, 0.5, 4.0);
  for (double d_pos : {0.1, 0.4, 0.9, 1.5}) {
    const double cur = triplet_loss(d_pos, 0.5, 4.0);
    CHECK(cur > prev);
    prev = cur;
  }
  prev = triplet_loss(0.5, 0.0, 4.0);
  for (double d_neg : {0.1, 0.4, 0.9, 1.5}) {
    const double cur = triplet_loss(0.5, d_neg, 4.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("batch triplet loss on identical embeddings is log 2") {
  const Vec v = random_unit(6, 1);
  const std::vector<Vec> g(4, v), a(4, v);
  CHECK(batch_triplet_loss(g, a, 10.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("batch triplet loss equals the enumeration oracle") {
  for (int n : {2, 3, 5}) {
    std::vector<Vec> g, a;
    for (int i = 0; i < n; ++i) {
      g.push_back(random_unit(8, 10 + i));
      a.push_back(random_unit(8, 100 + i));
    }
    CHECK(batch_triplet_loss(g, a, 10.0) ==
          doctest::Approx(enumeration_oracle(g, a, 10.0)).epsilon(1e-6));
  }
  std::vector<Vec> one{random_unit(4, 1)};
  CHECK_THROWS_AS(batch_triplet_loss(one, one, 10.0), std::invalid_argument);
}

TEST_CASE("batch triplet loss is invariant under consistent permutation") {
  std::vector<Vec> g, a;
  for (int i = 0; i < 5; ++i) {
    g.push_back(random_unit(8, 200 + i));
    a.push_back(random_unit(8, 300 + i));
  }
  const double before = batch_triplet_loss(g, a, 7.0);
  const std::vector<int> perm{3, 1, 4, 0, 2};
  std::vector<Vec> gp, ap;
  for (int i : perm) {
    gp.push_back(g[i]);
    ap.push_back(a[i]);
  }
  CHECK(batch_triplet_loss(gp, ap, 7.0) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("imaginary descriptors are uniform in [-1, 1] and seeded") {
  Rng rng(42);
  const Mat p = sample_imaginary_descriptors(4, 25000, rng);
  CHECK(p.minCoeff() >= -1.0);
  CHECK(p.maxCoeff() <= 1.0);
  CHECK(std::abs(p.mean()) <= 0.01);  // 1e5 entries

  Rng r1(7), r2(7), r3(8);
  const Mat a = sample_imaginary_descriptors(2, 8, r1);
  const Mat b = sample_imaginary_descriptors(2, 8, r2);
  const Mat c = sample_imaginary_descriptors(2, 8, r3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("counterfactual loss closed forms and range") {
  ModulatedEmbedding f, g;
  f.data = random_unit(6, 5);
  g.data = f.data;
  CHECK(counterfactual_loss(f, g, 5.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // beta = 5, d = 1
  Vec base = Vec::Zero(2), unit = Vec::Zero(2);
  unit(0) = 1.0;
  ModulatedEmbedding a, b;
  a.data = base;
  b.data = unit;
  CHECK(counterfactual_loss(a, b, 5.0) ==
        doctest::Approx(std::log(1.0 + std::exp(-5.0))).epsilon(1e-12));
  // beta = 5, d = 0.2
  b.data(0) = 0.2;
  CHECK(counterfactual_loss(a, b, 5.0) ==
        doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));

  // strictly decreasing, range (0, log 2]
  double prev = std::log(2.0) + 1;
  for (double d : {0.0, 0.3, 0.8, 1.4, 2.0}) {
    b.data(0) = d;
    const double value = counterfactual_loss(a, b, 5.0);
    CHECK(value > 0.0);
    CHECK(value <= std::log(2.0) + 1e-15);
    CHECK(value < prev);
    prev = value;
  }

  ModulatedEmbedding mismatched;
  mismatched.data = Vec::Zero(3);
  CHECK_THROWS_AS(counterfactual_loss(a, mismatched, 5.0), std::invalid_argument);
}

TEST_CASE("loss gradients match finite differences") {
  const double h = 1e-5;

  // batch triplet gradient
  std::vector<Vec> g, a;
  for (int i = 0; i < 3; ++i) {
    g.push_back(random_unit(6, 400 + i));
    a.push_back(random_unit(6, 500 + i));
  }
  std::vector<Vec> dg, da;
  const double base = batch_triplet_loss_grad(g, a, 10.0, dg, da);
  CHECK(base == doctest::Approx(batch_triplet_loss(g, a, 10.0)).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    for (int e = 0; e < 6; ++e) {
      auto gp = g, gm = g;
      gp[i](e) += h;
      gm[i](e) -= h;
      const double fd =
          (batch_triplet_loss(gp, a, 10.0) - batch_triplet_loss(gm, a, 10.0)) / (2 * h);
      CHECK(std::abs(dg[i](e) - fd) <=
            1e-4 * std::max({1.0, std::abs(fd), std::abs(dg[i](e))}));
      auto ap = a, am = a;
      ap[i](e) += h;
      am[i](e) -= h;
      const double fda =
          (batch_triplet_loss(g, ap, 10.0) - batch_triplet_loss(g, am, 10.0)) / (2 * h);
      CHECK(std::abs(da[i](e) - fda) <=
            1e-4 * std::max({1.0, std::abs(fda), std::abs(da[i](e))}));
    }
  }

  // counterfactual gradient in the distance
  for (double d : {0.05, 0.4, 1.2}) {
    double dd = 0;
    counterfactual_loss_grad(d, 5.0, dd);
    const double fd =
        (softplus(-5.0 * (d + h)) - softplus(-5.0 * (d - h))) / (2 * h);
    CHECK(dd == doctest::Approx(fd).epsilon(1e-6));
  }
}
