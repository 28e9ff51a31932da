#pragma once

#include "geodtr/model.hpp"

#include <string>

namespace geodtr {

/// Renders descriptor grids for one prepared pair as three PNGs:
/// `<prefix>_ground.png` and `<prefix>_aerial.png` tile the K descriptor
/// maps (min-max normalized grayscale, K tiles per row), and
/// `<prefix>_diff.png` shows the signed per-descriptor difference on a
/// blue-white-red diverging colormap. When the branch grids differ the
/// aerial maps are polar-unrolled onto the ground grid for the diff.
void write_descriptor_panels(GeoDtr& model, const Image& ground_in,
                             const Image& aerial_in, const std::string& prefix);

}  // namespace geodtr
