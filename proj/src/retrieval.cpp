#include "geodtr/retrieval.hpp"

#include <algorithm>
#include <cmath>

namespace geodtr {

Mat distance_matrix(const std::vector<Vec>& ground, const std::vector<Vec>& aerial) {
  if (ground.empty() || aerial.empty())
    throw std::invalid_argument("distance_matrix needs nonempty embedding sets");
  const Eigen::Index dim = ground[0].size();
  for (const auto& v : ground)
    if (v.size() != dim) throw std::invalid_argument("embedding lengths differ");
  for (const auto& v : aerial)
    if (v.size() != dim) throw std::invalid_argument("embedding lengths differ");

  Mat d(ground.size(), aerial.size());
  for (size_t i = 0; i < ground.size(); ++i)
    for (size_t j = 0; j < aerial.size(); ++j)
      d(i, j) = (ground[i] - aerial[j]).norm();
  return d;
}

double recall_at_k(const Mat& distances, int k) {
  const int m = static_cast<int>(distances.cols());
  if (k < 1 || k > m) throw std::invalid_argument("k out of range");
  if (distances.rows() > distances.cols())
    throw std::invalid_argument("more queries than references has no truth mapping");

  int hits = 0;
  for (Eigen::Index q = 0; q < distances.rows(); ++q) {
    const double d_true = distances(q, q);
    int rank = 0;  // number of references strictly ahead of the truth
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == q) continue;
      const double d = distances(q, j);
      if (d < d_true || (d == d_true && j < q)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(distances.rows());
}

double recall_at_percent(const Mat& distances, double pct) {
  if (!(pct > 0.0) || pct > 100.0) throw std::invalid_argument("pct out of range");
  const int m = static_cast<int>(distances.cols());
  const int k = static_cast<int>(std::ceil(pct / 100.0 * m));
  return recall_at_k(distances, std::max(1, k));
}

Recalls standard_recalls(const Mat& distances) {
  const int m = static_cast<int>(distances.cols());
  Recalls r;
  r.r1 = recall_at_k(distances, 1);
  r.r5 = recall_at_k(distances, std::min(5, m));
  r.r10 = recall_at_k(distances, std::min(10, m));
  r.r1pct = recall_at_percent(distances, 1.0);
  return r;
}

}  // namespace geodtr
