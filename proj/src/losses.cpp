#include "geodtr/losses.hpp"

#include <cmath>

namespace geodtr {

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double triplet_loss(double d_pos, double d_neg, double alpha) {
  if (d_pos < 0 || d_neg < 0)
    throw std::invalid_argument("distances must be nonnegative");
  return softplus(alpha * (d_pos - d_neg));
}

namespace {

void check_batch(const std::vector<Vec>& ground, const std::vector<Vec>& aerial) {
  if (ground.size() != aerial.size())
    throw std::invalid_argument("ground/aerial batch sizes differ");
  if (ground.size() < 2)
    throw std::invalid_argument("exhaustive mining needs at least 2 pairs");
}

}  // namespace

double batch_triplet_loss(const std::vector<Vec>& ground,
                          const std::vector<Vec>& aerial, double alpha) {
  check_batch(ground, aerial);
  const int n = static_cast<int>(ground.size());
  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    const double d_pos = (ground[m] - aerial[m]).norm();
    for (int j = 0; j < n; ++j) {
      if (j == m) continue;
      sum += softplus(alpha * (d_pos - (ground[m] - aerial[j]).norm()));
      sum += softplus(alpha * (d_pos - (aerial[m] - ground[j]).norm()));
    }
  }
  return sum / (2.0 * n * (n - 1));
}

double batch_triplet_loss_grad(const std::vector<Vec>& ground,
                               const std::vector<Vec>& aerial, double alpha,
                               std::vector<Vec>& dground, std::vector<Vec>& daerial) {
  check_batch(ground, aerial);
  const int n = static_cast<int>(ground.size());
  const double inv_count = 1.0 / (2.0 * n * (n - 1));

  dground.assign(n, Vec::Zero(ground[0].size()));
  daerial.assign(n, Vec::Zero(aerial[0].size()));

  auto add_dist_grad = [](const Vec& a, const Vec& b, double dd, Vec& da, Vec& db) {
    const auto [ga, gb] = distance_backward(a, b, dd);
    da += ga;
    db += gb;
  };

  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    const double d_pos = (ground[m] - aerial[m]).norm();
    for (int j = 0; j < n; ++j) {
      if (j == m) continue;
      // ground-anchored: positive (g_m, a_m), negative (g_m, a_j)
      {
        const double d_neg = (ground[m] - aerial[j]).norm();
        const double z = alpha * (d_pos - d_neg);
        sum += softplus(z);
        const double w = sigmoid(z) * alpha * inv_count;
        add_dist_grad(ground[m], aerial[m], w, dground[m], daerial[m]);
        add_dist_grad(ground[m], aerial[j], -w, dground[m], daerial[j]);
      }
      // aerial-anchored: positive (a_m, g_m), negative (a_m, g_j)
      {
        const double d_neg = (aerial[m] - ground[j]).norm();
        const double z = alpha * (d_pos - d_neg);
        sum += softplus(z);
        const double w = sigmoid(z) * alpha * inv_count;
        add_dist_grad(ground[m], aerial[m], w, dground[m], daerial[m]);
        add_dist_grad(aerial[m], ground[j], -w, daerial[m], dground[j]);
      }
    }
  }
  return sum * inv_count;
}

Mat sample_imaginary_descriptors(int k, int hw, Rng& rng) {
  Mat p(k, hw);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < hw; ++c) p(r, c) = rng.uniform(-1.0, 1.0);
  return p;
}

double counterfactual_loss(const ModulatedEmbedding& f,
                           const ModulatedEmbedding& f_hat, double beta) {
  return softplus(-beta * distance(f, f_hat));
}

double counterfactual_loss_grad(double dist, double beta, double& ddist) {
  ddist = -beta * sigmoid(-beta * dist);
  return softplus(-beta * dist);
}

}  // namespace geodtr
