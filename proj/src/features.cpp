#include "geodtr/features.hpp"

namespace geodtr {

Vec saliency_map(const Mat& features) {
  return features.colwise().maxCoeff().transpose();
}

std::vector<int> argmax_channels(const Mat& features) {
  std::vector<int> idx(features.cols());
  for (Eigen::Index s = 0; s < features.cols(); ++s) {
    int best = 0;
    double best_v = features(0, s);
    for (Eigen::Index c = 1; c < features.rows(); ++c) {
      if (features(c, s) > best_v) {
        best_v = features(c, s);
        best = static_cast<int>(c);
      }
    }
    idx[s] = best;
  }
  return idx;
}

Vec index_map(const Mat& features) {
  const std::vector<int> idx = argmax_channels(features);
  Vec out(features.cols());
  for (Eigen::Index s = 0; s < features.cols(); ++s)
    out(s) = static_cast<double>(idx[s]) / static_cast<double>(features.rows());
  return out;
}

void saliency_backward(const Vec& dsaliency, const std::vector<int>& argmax,
                       Mat& dfeatures) {
  for (Eigen::Index s = 0; s < dsaliency.size(); ++s)
    dfeatures(argmax[s], s) += dsaliency(s);
}

}  // namespace geodtr
