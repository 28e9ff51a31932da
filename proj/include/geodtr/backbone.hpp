#pragma once

#include "geodtr/image.hpp"
#include "geodtr/model_config.hpp"
#include "geodtr/rng.hpp"

#include <array>
#include <vector>

namespace geodtr {

/// Raw latent representation r: C rows, one flattened H*W spatial grid per
/// row (row-major spatial indexing).
struct RawFeatures {
  Mat data;  // C x (h*w)
  Grid grid;
  Branch branch = Branch::ground;
};

/// One 3x3 stride-2 pad-1 convolution with bias. Kernels are stored as
/// (out_ch) x (in_ch*9) with (in, kh, kw) row-major columns.
struct ConvLayer {
  Tensor weight;
  Tensor bias;
  int in_ch = 0;
  int out_ch = 0;

  void init(int in_channels, int out_channels, Rng& rng);
};

/// Desk-scale backbone: four [conv 3x3 s2 + bias + ReLU] blocks,
/// channels 3 -> 8 -> 16 -> 32 -> C, stride product 16.
struct BackboneParams {
  std::array<ConvLayer, 4> conv;

  void init(int out_channels, Rng& rng);

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    for (size_t i = 0; i < conv.size(); ++i) {
      const std::string base = prefix + "/conv" + std::to_string(i + 1);
      f(base + "/weight", conv[i].weight);
      f(base + "/bias", conv[i].bias);
    }
  }
};

struct ConvCache {
  Mat cols;  // (in_ch*9) x (hout*wout)
  Mat pre;   // pre-activation, out_ch x (hout*wout)
  Grid in_grid, out_grid;
};

struct BackboneCache {
  std::array<ConvCache, 4> layer;
};

Mat im2col(const Mat& input, Grid in, Grid out);
void col2im_accumulate(const Mat& dcols, Grid in, Grid out, Mat& dinput);

/// Deterministic forward; requires image sides divisible by the stride
/// product. cache may be null for inference.
RawFeatures backbone_forward(const Image& img, const BackboneParams& params,
                             const ModelConfig& cfg, Branch branch,
                             BackboneCache* cache);

/// Accumulates parameter gradients into params and returns nothing; the
/// gradient with respect to the input image is not needed by any caller.
void backbone_backward(const Mat& dfeatures, BackboneParams& params,
                       const BackboneCache& cache);

}  // namespace geodtr
