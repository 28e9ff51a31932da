#include "geodtr/embedding.hpp"
#include "geodtr/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace geodtr;

namespace {

Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// nested-loop Frobenius-product oracle
Vec modulate_oracle(const Mat& p, const Mat& r) {
  Vec f(p.rows() * r.rows());
  for (Eigen::Index m = 0; m < p.rows(); ++m)
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
      double acc = 0.0;
      for (Eigen::Index s = 0; s < p.cols(); ++s) acc += p(m, s) * r(j, s);
      f(m * r.rows() + j) = acc;
    }
  return f;
}

std::vector<int> rank_order(const Vec& query, const std::vector<Vec>& refs) {
  std::vector<int> order(refs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return (query - refs[a]).norm() < (query - refs[b]).norm();
  });
  return order;
}

}  // namespace

TEST_CASE("modulate sums products over the grid") {
  Mat p = Mat::Ones(1, 4);
  Mat r(1, 4);
  r << 1, 2, 3, 4;
  CHECK(modulate(p, r).data(0) == 10.0);

  // p == r gives the squared Frobenius norm
  CHECK(modulate(r, r).data(0) == doctest::Approx(30.0).epsilon(1e-15));
}

TEST_CASE("modulate matches the nested-loop oracle and its ordering") {
  const Mat p = random_mat(2, 4, 1);  // K=2, H=W=2
  const Mat r = random_mat(3, 4, 2);  // C=3
  const ModulatedEmbedding f = modulate(p, r);
  const Vec oracle = modulate_oracle(p, r);
  CHECK(f.data.size() == 6);
  CHECK((f.data - oracle).cwiseAbs().maxCoeff() <= 1e-6);

  // descriptor-major: f[m*C + j] = <p_m, r_j>
  CHECK(f.data(1 * 3 + 2) == doctest::Approx(p.row(1).dot(r.row(2))).epsilon(1e-12));

  Mat bad = random_mat(3, 5, 3);
  CHECK_THROWS_AS(modulate(p, bad), std::invalid_argument);
}

TEST_CASE("modulate is bilinear") {
  const Mat p1 = random_mat(2, 6, 4), p2 = random_mat(2, 6, 5);
  const Mat r1 = random_mat(3, 6, 6), r2 = random_mat(3, 6, 7);
  const double a = 0.7, b = -1.3;

  const Vec lhs = modulate(p1, (a * r1 + b * r2).eval()).data;
  const Vec rhs = a * modulate(p1, r1).data + b * modulate(p1, r2).data;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6);

  const Vec lhs2 = modulate((a * p1 + b * p2).eval(), r1).data;
  const Vec rhs2 = a * modulate(p1, r1).data + b * modulate(p2, r1).data;
  CHECK((lhs2 - rhs2).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("normalize scales to unit length") {
  ModulatedEmbedding f;
  f.data = Vec(2);
  f.data << 3, 4;
  const ModulatedEmbedding n = normalize(f);
  CHECK(n.normalized);
  CHECK(n.data(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(n.data(1) == doctest::Approx(0.8).epsilon(1e-12));

  const ModulatedEmbedding again = normalize(n);
  CHECK((again.data - n.data).cwiseAbs().maxCoeff() <= 1e-6);

  ModulatedEmbedding zero;
  zero.data = Vec::Zero(4);
  CHECK_THROWS_AS(normalize(zero), std::domain_error);
}

TEST_CASE("distance is Euclidean") {
  ModulatedEmbedding a, b;
  a.data = Vec::Zero(2);
  b.data = Vec(2);
  b.data << 3, 4;
  CHECK(distance(a, a) == 0.0);
  CHECK(distance(a, b) == doctest::Approx(5.0).epsilon(1e-15));

  // extended-precision oracle on a random pair
  const Mat x = random_mat(16, 1, 8), y = random_mat(16, 1, 9);
  ModulatedEmbedding fx, fy;
  fx.data = x.col(0);
  fy.data = y.col(0);
  long double acc = 0;
  for (int i = 0; i < 16; ++i) {
    const long double d = static_cast<long double>(x(i, 0)) - y(i, 0);
    acc += d * d;
  }
  CHECK(distance(fx, fy) ==
        doctest::Approx(static_cast<double>(std::sqrt(acc))).epsilon(1e-12));

  ModulatedEmbedding short_vec;
  short_vec.data = Vec::Zero(3);
  CHECK_THROWS_AS(distance(fx, short_vec), std::invalid_argument);

  ModulatedEmbedding normd = normalize(fx);
  CHECK_THROWS_AS(distance(normd, fy), std::invalid_argument);
}

TEST_CASE("ranking is invariant to positive rescaling before normalization") {
  Rng rng(11);
  const Mat p = random_mat(2, 8, 12);
  std::vector<Vec> refs;
  for (int j = 0; j < 6; ++j)
    refs.push_back(normalize(modulate(p, random_mat(3, 8, 20 + j))).data);

  const Mat rq = random_mat(3, 8, 40);
  const ModulatedEmbedding q_raw = modulate(p, rq);
  const Vec q1 = normalize(q_raw).data;
  ModulatedEmbedding scaled;
  scaled.data = q_raw.data * rng.uniform(0.1, 10.0);
  const Vec q2 = normalize(scaled).data;

  CHECK(rank_order(q1, refs) == rank_order(q2, refs));
}

TEST_CASE("analytic backward passes agree with finite differences") {
  const Mat p = random_mat(2, 6, 50);
  const Mat r = random_mat(3, 6, 51);
  const Vec df = random_mat(6, 1, 52).col(0);
  const double h = 1e-6;

  Mat dp = Mat::Zero(2, 6), dr = Mat::Zero(3, 6);
  modulate_backward(df, p, r, &dp, &dr);
  Mat p_mut = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double saved = p_mut.data()[i];
    p_mut.data()[i] = saved + h;
    const double up = df.dot(modulate(p_mut, r).data);
    p_mut.data()[i] = saved - h;
    const double down = df.dot(modulate(p_mut, r).data);
    p_mut.data()[i] = saved;
    CHECK(dp.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4));
  }

  // normalize backward
  const Vec f = random_mat(5, 1, 53).col(0);
  const Vec dy = random_mat(5, 1, 54).col(0);
  const Vec g = normalize_backward(f, dy);
  for (int i = 0; i < 5; ++i) {
    Vec fp = f, fm = f;
    fp(i) += h;
    fm(i) -= h;
    const double fd = (dy.dot(fp / fp.norm()) - dy.dot(fm / fm.norm())) / (2 * h);
    CHECK(g(i) == doctest::Approx(fd).epsilon(1e-5));
  }
}
