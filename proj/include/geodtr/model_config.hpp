#pragma once

#include "geodtr/types.hpp"

namespace geodtr {

/// Shape of both network branches. Feature grids are derived from the
/// input image sizes and the backbone stride product; the extractor
/// embedding width is D_e = (H*W)/2 per branch.
struct ModelConfig {
  int channels = 16;  // C, backbone output channels
  int k = 8;          // number of layout descriptors
  int heads = 4;
  int layers = 2;
  double dropout = 0.3;
  int ff_dim = 64;
  int downsample = 16;  // fixed by the four stride-2 blocks

  int aerial_size = 64;  // aerial images are square
  int ground_height = 32;
  int ground_width = 128;

  bool share_weights = false;
  bool normalize_embeddings = true;

  /// Input image size seen by a branch. With the polar transform enabled
  /// the aerial branch consumes panoramas of the ground size.
  Grid branch_input(Branch b, bool use_polar_transform) const {
    if (b == Branch::ground || use_polar_transform)
      return {ground_height, ground_width};
    return {aerial_size, aerial_size};
  }

  Grid branch_grid(Branch b, bool use_polar_transform) const {
    const Grid in = branch_input(b, use_polar_transform);
    return {in.h / downsample, in.w / downsample};
  }

  int embed_dim(Grid g) const { return g.cells() / 2; }

  int embedding_length() const { return channels * k; }

  void validate(bool use_polar_transform) const;
};

}  // namespace geodtr
