#pragma once

#include "geodtr/backbone.hpp"

namespace geodtr {

/// Channel-wise max over the feature tensor, flattened row-major.
Vec saliency_map(const Mat& features);

/// Argmax channel per position (ties to the lowest channel index),
/// divided by the channel count. Treated as constant under
/// differentiation.
Vec index_map(const Mat& features);

/// Argmax channel indices, ties to the lowest index.
std::vector<int> argmax_channels(const Mat& features);

/// Routes the saliency gradient back to the argmax channel per position.
void saliency_backward(const Vec& dsaliency, const std::vector<int>& argmax,
                       Mat& dfeatures);

}  // namespace geodtr
