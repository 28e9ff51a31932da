#pragma once

#include "geodtr/features.hpp"

#include <string>
#include <vector>

namespace geodtr {

struct LayerNormCache {
  Mat xhat;
  Vec inv_std;
};

struct TransformerLayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // attention projections
  Tensor ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
  Tensor w1, b1, w2, b2;  // feed-forward

  void init(int d_e, int ff_dim, Rng& rng);

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + "/attn/wq", wq);
    f(prefix + "/attn/bq", bq);
    f(prefix + "/attn/wk", wk);
    f(prefix + "/attn/bk", bk);
    f(prefix + "/attn/wv", wv);
    f(prefix + "/attn/bv", bv);
    f(prefix + "/attn/wo", wo);
    f(prefix + "/attn/bo", bo);
    f(prefix + "/ln1/gamma", ln1_gamma);
    f(prefix + "/ln1/beta", ln1_beta);
    f(prefix + "/ff/w1", w1);
    f(prefix + "/ff/b1", b1);
    f(prefix + "/ff/w2", w2);
    f(prefix + "/ff/b2", b2);
    f(prefix + "/ln2/gamma", ln2_gamma);
    f(prefix + "/ln2/beta", ln2_beta);
  }
};

struct TransformerLayerCache {
  Mat x_in;
  Mat q, k, v;
  std::vector<Mat> attn;  // per-head softmax weights, K x K
  Mat concat;             // heads' A*Vh side by side
  Mat attn_proj;          // output projection, pre-dropout
  Arr drop1, drop2;       // inverted-dropout masks; empty in eval mode
  LayerNormCache ln1, ln2;
  Mat y;   // after first residual + norm
  Mat h1;  // feed-forward pre-activation
  Mat gelu_out;
  Mat ff_out;  // pre-dropout
  Mat z;       // layer output
};

/// Geometric layout extractor: saliency embedding, index-aware positional
/// embedding (E_hat = E + HardTanh(E_pe + W_LN * M_idx)), transformer
/// encoder, output projection, HardTanh.
struct ExtractorParams {
  Tensor w_in, b_in;    // (K*D_e) x (H*W), (K*D_e) x 1
  Tensor e_pe;          // K x D_e
  Tensor w_ln;          // (K*D_e) x (H*W)
  std::vector<TransformerLayerParams> layer;
  Tensor w_out, b_out;  // (K*H*W) x (K*D_e), (K*H*W) x 1

  int k = 0, d_e = 0, hw = 0, heads = 0;
  double dropout = 0.0;

  void init(const ModelConfig& cfg, Grid grid, Rng& rng);

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + "/w_in", w_in);
    f(prefix + "/b_in", b_in);
    f(prefix + "/e_pe", e_pe);
    f(prefix + "/w_ln", w_ln);
    for (size_t i = 0; i < layer.size(); ++i)
      layer[i].visit(prefix + "/layer" + std::to_string(i), f);
    f(prefix + "/w_out", w_out);
    f(prefix + "/b_out", b_out);
  }
};

struct ExtractorCache {
  Vec saliency, midx;
  std::vector<int> argmax;
  int feature_channels = 0;
  Mat e;        // K x D_e
  Mat pe_pre;   // K x D_e, pre-HardTanh
  Mat ehat;     // K x D_e
  std::vector<TransformerLayerCache> layers;
  Vec p_pre;    // K*H*W, pre-HardTanh
  Mat p;        // K x (H*W)
};

Mat layer_norm_rows(const Mat& x, const Vec& gamma, const Vec& beta,
                    LayerNormCache* cache);

/// E_hat from the saliency map and index map (the formula above). Shapes
/// are validated against the parameter dimensions.
Mat compute_indexed_embeddings(const Vec& saliency, const Vec& midx,
                               const ExtractorParams& params,
                               ExtractorCache* cache);

/// Post-norm encoder stack. Dropout is drawn from rng only in train mode.
Mat transformer_encode(const Mat& x, const ExtractorParams& params,
                       bool train_mode, Rng* dropout_rng,
                       std::vector<TransformerLayerCache>* caches);

/// Full descriptor pipeline; output K x (H*W) with entries in [-1, 1].
Mat extract_descriptors(const RawFeatures& r, const ExtractorParams& params,
                        bool train_mode, Rng* dropout_rng,
                        ExtractorCache* cache);

/// Backpropagates d(loss)/d(descriptors); accumulates parameter gradients
/// and returns d(loss)/d(raw features) from the saliency path.
Mat extractor_backward(const Mat& ddescriptors, ExtractorParams& params,
                       const ExtractorCache& cache);

}  // namespace geodtr
