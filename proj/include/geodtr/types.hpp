#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace geodtr {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Arr = Eigen::ArrayXXd;

enum class View { aerial, panorama };
enum class Branch { ground, aerial };

inline const char* branch_name(Branch b) {
  return b == Branch::ground ? "ground" : "aerial";
}

/// Spatial extent of a feature grid; cells are flattened row-major
/// (index = row * w + col) throughout.
struct Grid {
  int h = 0;
  int w = 0;
  int cells() const { return h * w; }
  bool operator==(const Grid&) const = default;
};

/// A learnable tensor: value plus gradient accumulator of the same shape.
/// Vectors are stored as n-by-1 matrices so parameter visitors stay uniform.
struct Tensor {
  Mat v;
  Mat g;

  void init(Eigen::Index rows, Eigen::Index cols) {
    v.setZero(rows, cols);
    g.setZero(rows, cols);
  }
  void zero_grad() { g.setZero(v.rows(), v.cols()); }
};

}  // namespace geodtr
