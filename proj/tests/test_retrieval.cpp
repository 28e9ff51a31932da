#include "geodtr/retrieval.hpp"
#include "geodtr/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace geodtr;

namespace {

Mat random_distances(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  Mat d(n, m);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = rng.uniform(0.0, 2.0);
  return d;
}

// full-sort brute-force oracle with index tie-breaking
double sort_oracle(const Mat& d, int k) {
  int hits = 0;
  for (Eigen::Index q = 0; q < d.rows(); ++q) {
    std::vector<int> order(d.cols());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      if (d(q, x) != d(q, y)) return d(q, x) < d(q, y);
      return x < y;
    });
    const auto pos = std::find(order.begin(), order.end(), static_cast<int>(q));
    if (pos - order.begin() < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.rows());
}

}  // namespace

TEST_CASE("distance matrix over orthonormal embeddings") {
  std::vector<Vec> basis;
  for (int i = 0; i < 4; ++i) {
    Vec v = Vec::Zero(4);
    v(i) = 1.0;
    basis.push_back(v);
  }
  const Mat d = distance_matrix(basis, basis);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j)
        CHECK(d(i, j) == 0.0);
      else
        CHECK(d(i, j) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
  CHECK(recall_at_k(d, 1) == 1.0);

  std::vector<Vec> two{basis[0], basis[1]};
  const Mat d2 = distance_matrix(two, two);
  CHECK(d2(0, 0) == 0.0);
  CHECK(d2(0, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(d2(1, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(d2(1, 1) == 0.0);

  std::vector<Vec> bad{Vec::Zero(3)};
  CHECK_THROWS_AS(distance_matrix(basis, bad), std::invalid_argument);
}

TEST_CASE("distance matrix matches a pairwise fp64 oracle") {
  Rng rng(5);
  std::vector<Vec> g, a;
  for (int i = 0; i < 5; ++i) {
    Vec vg(7), va(7);
    for (int e = 0; e < 7; ++e) {
      vg(e) = rng.normal();
      va(e) = rng.normal();
    }
    g.push_back(vg);
    a.push_back(va);
  }
  const Mat d = distance_matrix(g, a);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double acc = 0;
      for (int e = 0; e < 7; ++e) acc += (g[i](e) - a[j](e)) * (g[i](e) - a[j](e));
      CHECK(d(i, j) == doctest::Approx(std::sqrt(acc)).epsilon(1e-6));
    }
}

TEST_CASE("recall on a diagonal-dominant matrix") {
  Mat d = Mat::Constant(4, 4, 10.0);
  d.diagonal().setZero();
  CHECK(recall_at_k(d, 1) == 1.0);
}

TEST_CASE("recall when the truth always ranks last") {
  Mat d = Mat::Constant(4, 4, 0.1);
  d.diagonal().setConstant(5.0);
  CHECK(recall_at_k(d, 1) == 0.0);
  CHECK(recall_at_k(d, 3) == 0.0);
  CHECK(recall_at_k(d, 4) == 1.0);
}

TEST_CASE("recall matches the full-sort oracle, including ties") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Mat d = random_distances(8, 8, seed);
    if (seed % 2 == 0) {
      // plant exact ties
      d(1, 1) = d(1, 0);
      d(3, 3) = d(3, 5);
    }
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double r = recall_at_k(d, k);
      CHECK(r == sort_oracle(d, k));
      CHECK(r >= prev);  // monotone in k
      prev = r;
    }
    CHECK(recall_at_k(d, 8) == 1.0);

    // rank-based: invariant under positive rescaling
    const Mat scaled = d * 3.7;
    for (int k = 1; k <= 8; ++k) CHECK(recall_at_k(scaled, k) == recall_at_k(d, k));
  }
}

TEST_CASE("recall_at_percent uses the ceiling for k") {
  // truth at rank exactly 2 for every query: R@1% over 200 refs needs k=2
  Mat d200 = Mat::Constant(200, 200, 1.0);
  for (int q = 0; q < 200; ++q) {
    d200(q, (q + 1) % 200) = 0.1;  // someone else is closer
    d200(q, q) = 0.2;              // truth is second
  }
  CHECK(recall_at_k(d200, 1) == 0.0);
  CHECK(recall_at_k(d200, 2) == 1.0);
  CHECK(recall_at_percent(d200, 1.0) == 1.0);  // k = ceil(2.0) = 2

  // over 50 refs, 1% gives k = ceil(0.5) = 1
  Mat d50 = Mat::Constant(50, 50, 1.0);
  for (int q = 0; q < 50; ++q) {
    d50(q, (q + 1) % 50) = 0.1;
    d50(q, q) = 0.2;
  }
  CHECK(recall_at_percent(d50, 1.0) == 0.0);

  // delegation on random matrices
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const Mat d = random_distances(12, 12, seed);
    CHECK(recall_at_percent(d, 25.0) == recall_at_k(d, 3));
    CHECK(recall_at_percent(d, 100.0) == recall_at_k(d, 12));
  }
}

TEST_CASE("recall argument validation") {
  const Mat d = random_distances(4, 4, 1);
  CHECK_THROWS_AS(recall_at_k(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(recall_at_k(d, 5), std::invalid_argument);
  CHECK_THROWS_AS(recall_at_percent(d, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(recall_at_percent(d, 101.0), std::invalid_argument);
}
