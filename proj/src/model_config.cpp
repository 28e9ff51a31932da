#include "geodtr/model_config.hpp"

#include <string>

namespace geodtr {

void ModelConfig::validate(bool use_polar_transform) const {
  if (channels < 1) throw std::invalid_argument("channels must be >= 1");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (heads < 1 || layers < 0) throw std::invalid_argument("bad transformer shape");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (downsample != 16)
    throw std::invalid_argument("backbone stride product is fixed at 16");

  for (Branch b : {Branch::ground, Branch::aerial}) {
    const Grid in = branch_input(b, use_polar_transform);
    if (in.h % downsample != 0 || in.w % downsample != 0)
      throw std::invalid_argument(std::string(branch_name(b)) +
                                  " input size must be divisible by the downsample factor");
    const Grid g = branch_grid(b, use_polar_transform);
    if (g.cells() % 2 != 0)
      throw std::invalid_argument("feature grid cell count must be even");
    if (embed_dim(g) % heads != 0)
      throw std::invalid_argument("heads must divide the embedding width");
  }
  if (share_weights) {
    const Grid gg = branch_grid(Branch::ground, use_polar_transform);
    const Grid ga = branch_grid(Branch::aerial, use_polar_transform);
    if (!(gg == ga))
      throw std::invalid_argument("share_weights requires equal branch grids");
  }
}

}  // namespace geodtr
