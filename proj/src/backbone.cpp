#include "geodtr/backbone.hpp"

namespace geodtr {

namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

Grid conv_out_grid(Grid in) {
  return {(in.h + 2 * kPad - kKernel) / kStride + 1,
          (in.w + 2 * kPad - kKernel) / kStride + 1};
}

}  // namespace

void ConvLayer::init(int in_channels, int out_channels, Rng& rng) {
  in_ch = in_channels;
  out_ch = out_channels;
  weight.init(out_ch, in_ch * kKernel * kKernel);
  bias.init(out_ch, 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_ch * kKernel * kKernel));
  for (Eigen::Index i = 0; i < weight.v.size(); ++i)
    weight.v.data()[i] = scale * rng.normal();
}

void BackboneParams::init(int out_channels, Rng& rng) {
  const int plan[5] = {3, 8, 16, 32, out_channels};
  for (int i = 0; i < 4; ++i) conv[i].init(plan[i], plan[i + 1], rng);
}

Mat im2col(const Mat& input, Grid in, Grid out) {
  const int in_ch = static_cast<int>(input.rows());
  Mat cols(in_ch * kKernel * kKernel, out.cells());
  for (int ci = 0; ci < in_ch; ++ci) {
    for (int kr = 0; kr < kKernel; ++kr) {
      for (int kc = 0; kc < kKernel; ++kc) {
        const int row = ci * kKernel * kKernel + kr * kKernel + kc;
        for (int ho = 0; ho < out.h; ++ho) {
          const int hi = ho * kStride + kr - kPad;
          for (int wo = 0; wo < out.w; ++wo) {
            const int wi = wo * kStride + kc - kPad;
            const bool inside = hi >= 0 && hi < in.h && wi >= 0 && wi < in.w;
            cols(row, ho * out.w + wo) = inside ? input(ci, hi * in.w + wi) : 0.0;
          }
        }
      }
    }
  }
  return cols;
}

void col2im_accumulate(const Mat& dcols, Grid in, Grid out, Mat& dinput) {
  const int in_ch = static_cast<int>(dinput.rows());
  for (int ci = 0; ci < in_ch; ++ci) {
    for (int kr = 0; kr < kKernel; ++kr) {
      for (int kc = 0; kc < kKernel; ++kc) {
        const int row = ci * kKernel * kKernel + kr * kKernel + kc;
        for (int ho = 0; ho < out.h; ++ho) {
          const int hi = ho * kStride + kr - kPad;
          if (hi < 0 || hi >= in.h) continue;
          for (int wo = 0; wo < out.w; ++wo) {
            const int wi = wo * kStride + kc - kPad;
            if (wi < 0 || wi >= in.w) continue;
            dinput(ci, hi * in.w + wi) += dcols(row, ho * out.w + wo);
          }
        }
      }
    }
  }
}

RawFeatures backbone_forward(const Image& img, const BackboneParams& params,
                             const ModelConfig& cfg, Branch branch,
                             BackboneCache* cache) {
  if (img.height % cfg.downsample != 0 || img.width % cfg.downsample != 0)
    throw std::invalid_argument("image size must be divisible by downsample factor " +
                                std::to_string(cfg.downsample));

  Grid grid{img.height, img.width};
  Mat x(3, grid.cells());
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < grid.h; ++r)
      for (int c = 0; c < grid.w; ++c) x(ch, r * grid.w + c) = img.plane[ch](r, c);

  for (int l = 0; l < 4; ++l) {
    const ConvLayer& layer = params.conv[l];
    const Grid out = conv_out_grid(grid);
    Mat cols = im2col(x, grid, out);
    Mat pre = layer.weight.v * cols;
    pre.colwise() += layer.bias.v.col(0);
    if (cache) {
      cache->layer[l].cols = cols;
      cache->layer[l].pre = pre;
      cache->layer[l].in_grid = grid;
      cache->layer[l].out_grid = out;
    }
    x = pre.cwiseMax(0.0);
    grid = out;
  }
  return RawFeatures{std::move(x), grid, branch};
}

void backbone_backward(const Mat& dfeatures, BackboneParams& params,
                       const BackboneCache& cache) {
  Mat dout = dfeatures;
  for (int l = 3; l >= 0; --l) {
    ConvLayer& layer = params.conv[l];
    const ConvCache& cc = cache.layer[l];
    // ReLU mask
    Mat dpre = ((cc.pre.array() > 0.0).cast<double>() * dout.array()).matrix();
    layer.bias.g.col(0) += dpre.rowwise().sum();
    layer.weight.g += dpre * cc.cols.transpose();
    if (l > 0) {
      Mat dcols = layer.weight.v.transpose() * dpre;
      Mat dinput = Mat::Zero(layer.in_ch, cc.in_grid.cells());
      col2im_accumulate(dcols, cc.in_grid, cc.out_grid, dinput);
      dout = std::move(dinput);
    }
  }
}

}  // namespace geodtr
