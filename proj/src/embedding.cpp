#include "geodtr/embedding.hpp"

namespace geodtr {

namespace {
constexpr double kMinNorm = 1e-12;
}

ModulatedEmbedding modulate(const Mat& descriptors, const Mat& features) {
  if (descriptors.cols() != features.cols())
    throw std::invalid_argument("descriptor and feature grids must agree");
  const Eigen::Index k = descriptors.rows();
  const Eigen::Index c = features.rows();
  const Mat fr = descriptors * features.transpose();  // K x C
  ModulatedEmbedding out;
  out.data.resize(k * c);
  for (Eigen::Index m = 0; m < k; ++m)
    for (Eigen::Index j = 0; j < c; ++j) out.data(m * c + j) = fr(m, j);
  return out;
}

ModulatedEmbedding normalize(const ModulatedEmbedding& f) {
  const double n = f.data.norm();
  if (n <= kMinNorm)
    throw std::domain_error("cannot normalize a (near-)zero embedding");
  return ModulatedEmbedding{f.data / n, true};
}

double distance(const ModulatedEmbedding& a, const ModulatedEmbedding& b) {
  if (a.data.size() != b.data.size())
    throw std::invalid_argument("embedding lengths differ");
  if (a.normalized != b.normalized)
    throw std::invalid_argument("embeddings have different normalization states");
  return (a.data - b.data).norm();
}

Vec normalize_backward(const Vec& f_raw, const Vec& dy) {
  const double n = f_raw.norm();
  const Vec y = f_raw / n;
  return (dy - y * y.dot(dy)) / n;
}

void modulate_backward(const Vec& df, const Mat& descriptors, const Mat& features,
                       Mat* ddescriptors, Mat* dfeatures) {
  const Eigen::Index k = descriptors.rows();
  const Eigen::Index c = features.rows();
  Mat dfr(k, c);
  for (Eigen::Index m = 0; m < k; ++m)
    for (Eigen::Index j = 0; j < c; ++j) dfr(m, j) = df(m * c + j);
  if (ddescriptors) *ddescriptors += dfr * features;
  if (dfeatures) *dfeatures += dfr.transpose() * descriptors;
}

std::pair<Vec, Vec> distance_backward(const Vec& a, const Vec& b, double ddist) {
  const Vec diff = a - b;
  const double d = diff.norm();
  if (d <= kMinNorm)
    return {Vec::Zero(a.size()), Vec::Zero(b.size())};
  const Vec da = diff * (ddist / d);
  return {da, -da};
}

}  // namespace geodtr
