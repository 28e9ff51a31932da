#include "geodtr/extractor.hpp"

#include <cmath>

namespace geodtr {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

double hardtanh(double x) { return std::clamp(x, -1.0, 1.0); }

void init_affine(Tensor& w, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.v.cols()));
  for (Eigen::Index i = 0; i < w.v.size(); ++i) w.v.data()[i] = scale * rng.normal();
}

Arr draw_dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Arr mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      mask(r, c) = rng.uniform() >= p ? keep_scale : 0.0;
  return mask;
}

Mat softmax_rows(const Mat& s) {
  Mat out(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double m = s.row(r).maxCoeff();
    Eigen::RowVectorXd e = (s.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

Vec flatten_rowmajor(const Mat& m) {
  Vec out(m.size());
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(i++) = m(r, c);
  return out;
}

Mat unflatten_rowmajor(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  Mat out(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = v(i++);
  return out;
}

}  // namespace

void TransformerLayerParams::init(int d_e, int ff_dim, Rng& rng) {
  for (Tensor* t : {&wq, &wk, &wv, &wo}) {
    t->init(d_e, d_e);
    init_affine(*t, rng);
  }
  for (Tensor* t : {&bq, &bk, &bv, &bo}) t->init(d_e, 1);
  ln1_gamma.init(d_e, 1);
  ln1_gamma.v.setOnes();
  ln1_beta.init(d_e, 1);
  ln2_gamma.init(d_e, 1);
  ln2_gamma.v.setOnes();
  ln2_beta.init(d_e, 1);
  w1.init(ff_dim, d_e);
  init_affine(w1, rng);
  b1.init(ff_dim, 1);
  w2.init(d_e, ff_dim);
  init_affine(w2, rng);
  b2.init(d_e, 1);
}

void ExtractorParams::init(const ModelConfig& cfg, Grid grid, Rng& rng) {
  k = cfg.k;
  hw = grid.cells();
  d_e = cfg.embed_dim(grid);
  heads = cfg.heads;
  dropout = cfg.dropout;

  w_in.init(k * d_e, hw);
  init_affine(w_in, rng);
  b_in.init(k * d_e, 1);
  e_pe.init(k, d_e);
  for (Eigen::Index i = 0; i < e_pe.v.size(); ++i) e_pe.v.data()[i] = 0.02 * rng.normal();
  w_ln.init(k * d_e, hw);
  init_affine(w_ln, rng);

  layer.resize(cfg.layers);
  for (auto& l : layer) l.init(d_e, cfg.ff_dim, rng);

  w_out.init(k * hw, k * d_e);
  init_affine(w_out, rng);
  b_out.init(k * hw, 1);
}

Mat layer_norm_rows(const Mat& x, const Vec& gamma, const Vec& beta,
                    LayerNormCache* cache) {
  Mat xhat(x.rows(), x.cols());
  Vec inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + kLnEps);
    xhat.row(r) = ((x.row(r).array() - mu) * is).matrix();
    inv_std(r) = is;
  }
  Mat y = (xhat.array().rowwise() * gamma.transpose().array()).matrix();
  y.array().rowwise() += beta.transpose().array();
  if (cache) {
    cache->xhat = xhat;
    cache->inv_std = inv_std;
  }
  return y;
}

namespace {

/// dL/dx of layer_norm_rows; accumulates dgamma/dbeta.
Mat layer_norm_backward(const Mat& dy, const Vec& gamma, const LayerNormCache& lc,
                        Tensor& gamma_t, Tensor& beta_t) {
  gamma_t.g.col(0) += (dy.array() * lc.xhat.array()).colwise().sum().matrix().transpose();
  beta_t.g.col(0) += dy.colwise().sum().transpose();
  Mat dxhat = (dy.array().rowwise() * gamma.transpose().array()).matrix();
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).mean();
    const double mean_dx = (dxhat.row(r).array() * lc.xhat.row(r).array()).mean();
    dx.row(r) = ((dxhat.row(r).array() - mean_d - lc.xhat.row(r).array() * mean_dx) *
                 lc.inv_std(r))
                    .matrix();
  }
  return dx;
}

}  // namespace

Mat compute_indexed_embeddings(const Vec& saliency, const Vec& midx,
                               const ExtractorParams& params,
                               ExtractorCache* cache) {
  if (saliency.size() != params.hw || midx.size() != params.hw)
    throw std::invalid_argument("saliency/index map size does not match extractor grid");

  const Vec e_flat = params.w_in.v * saliency + params.b_in.v.col(0);
  const Vec pe_flat = flatten_rowmajor(params.e_pe.v) + params.w_ln.v * midx;
  Mat e = unflatten_rowmajor(e_flat, params.k, params.d_e);
  Mat pe_pre = unflatten_rowmajor(pe_flat, params.k, params.d_e);
  Mat ehat = e + pe_pre.unaryExpr([](double x) { return hardtanh(x); });
  if (cache) {
    cache->e = e;
    cache->pe_pre = pe_pre;
    cache->ehat = ehat;
  }
  return ehat;
}

Mat transformer_encode(const Mat& x_in, const ExtractorParams& params,
                       bool train_mode, Rng* dropout_rng,
                       std::vector<TransformerLayerCache>* caches) {
  if (params.d_e % params.heads != 0)
    throw std::invalid_argument("heads must divide the embedding width");
  const int dh = params.d_e / params.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool dropping = train_mode && params.dropout > 0.0 && dropout_rng != nullptr;

  if (caches) caches->assign(params.layer.size(), TransformerLayerCache{});

  Mat x = x_in;
  for (size_t li = 0; li < params.layer.size(); ++li) {
    const TransformerLayerParams& lp = params.layer[li];
    TransformerLayerCache local;
    TransformerLayerCache& lc = caches ? (*caches)[li] : local;
    lc.x_in = x;

    Mat q = x * lp.wq.v.transpose();
    q.rowwise() += lp.bq.v.col(0).transpose();
    Mat k = x * lp.wk.v.transpose();
    k.rowwise() += lp.bk.v.col(0).transpose();
    Mat v = x * lp.wv.v.transpose();
    v.rowwise() += lp.bv.v.col(0).transpose();
    lc.q = q;
    lc.k = k;
    lc.v = v;

    Mat concat(x.rows(), params.d_e);
    lc.attn.resize(params.heads);
    for (int h = 0; h < params.heads; ++h) {
      const auto qh = q.middleCols(h * dh, dh);
      const auto kh = k.middleCols(h * dh, dh);
      const auto vh = v.middleCols(h * dh, dh);
      Mat a = softmax_rows(qh * kh.transpose() * scale);
      concat.middleCols(h * dh, dh) = a * vh;
      lc.attn[h] = std::move(a);
    }
    lc.concat = concat;

    Mat attn_proj = concat * lp.wo.v.transpose();
    attn_proj.rowwise() += lp.bo.v.col(0).transpose();
    lc.attn_proj = attn_proj;

    Mat attn_drop = attn_proj;
    if (dropping) {
      lc.drop1 = draw_dropout_mask(attn_proj.rows(), attn_proj.cols(),
                                   params.dropout, *dropout_rng);
      attn_drop = (attn_proj.array() * lc.drop1).matrix();
    }

    Mat y = layer_norm_rows(x + attn_drop, lp.ln1_gamma.v.col(0),
                            lp.ln1_beta.v.col(0), &lc.ln1);
    lc.y = y;

    Mat h1 = y * lp.w1.v.transpose();
    h1.rowwise() += lp.b1.v.col(0).transpose();
    lc.h1 = h1;
    Mat g = h1.unaryExpr([](double a) { return gelu(a); });
    lc.gelu_out = g;
    Mat ff = g * lp.w2.v.transpose();
    ff.rowwise() += lp.b2.v.col(0).transpose();
    lc.ff_out = ff;

    Mat ff_drop = ff;
    if (dropping) {
      lc.drop2 = draw_dropout_mask(ff.rows(), ff.cols(), params.dropout, *dropout_rng);
      ff_drop = (ff.array() * lc.drop2).matrix();
    }

    x = layer_norm_rows(y + ff_drop, lp.ln2_gamma.v.col(0), lp.ln2_beta.v.col(0),
                        &lc.ln2);
    lc.z = x;
  }
  return x;
}

Mat extract_descriptors(const RawFeatures& r, const ExtractorParams& params,
                        bool train_mode, Rng* dropout_rng, ExtractorCache* cache) {
  if (r.grid.cells() != params.hw)
    throw std::invalid_argument("feature grid does not match extractor parameters");

  const Vec m = saliency_map(r.data);
  const Vec midx = index_map(r.data);
  if (cache) {
    cache->saliency = m;
    cache->midx = midx;
    cache->argmax = argmax_channels(r.data);
    cache->feature_channels = static_cast<int>(r.data.rows());
  }

  Mat ehat = compute_indexed_embeddings(m, midx, params, cache);
  Mat encoded = transformer_encode(ehat, params, train_mode, dropout_rng,
                                   cache ? &cache->layers : nullptr);

  const Vec p_pre = params.w_out.v * flatten_rowmajor(encoded) + params.b_out.v.col(0);
  Mat p = unflatten_rowmajor(p_pre, params.k, params.hw)
              .unaryExpr([](double x) { return hardtanh(x); });
  if (cache) {
    cache->p_pre = p_pre;
    cache->p = p;
  }
  return p;
}

Mat extractor_backward(const Mat& ddescriptors, ExtractorParams& params,
                       const ExtractorCache& cache) {
  const int dh = params.d_e / params.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // output HardTanh + projection
  Vec dp_flat = flatten_rowmajor(ddescriptors);
  for (Eigen::Index i = 0; i < dp_flat.size(); ++i)
    if (std::abs(cache.p_pre(i)) >= 1.0) dp_flat(i) = 0.0;

  const Vec ehat_out_flat = flatten_rowmajor(cache.layers.empty()
                                                 ? cache.ehat
                                                 : cache.layers.back().z);
  params.w_out.g += dp_flat * ehat_out_flat.transpose();
  params.b_out.g.col(0) += dp_flat;
  Mat dx = unflatten_rowmajor(params.w_out.v.transpose() * dp_flat, params.k, params.d_e);

  // transformer stack in reverse
  for (int li = static_cast<int>(cache.layers.size()) - 1; li >= 0; --li) {
    const TransformerLayerCache& lc = cache.layers[li];
    TransformerLayerParams& lp = params.layer[li];

    Mat dsum2 = layer_norm_backward(dx, lp.ln2_gamma.v.col(0), lc.ln2,
                                    lp.ln2_gamma, lp.ln2_beta);
    Mat dy = dsum2;
    Mat dff = dsum2;
    if (lc.drop2.size() > 0) dff = (dff.array() * lc.drop2).matrix();

    lp.w2.g += dff.transpose() * lc.gelu_out;
    lp.b2.g.col(0) += dff.colwise().sum().transpose();
    Mat dgelu = dff * lp.w2.v;
    Mat dh1 = (dgelu.array() * lc.h1.unaryExpr([](double a) { return gelu_grad(a); }).array())
                  .matrix();
    lp.w1.g += dh1.transpose() * lc.y;
    lp.b1.g.col(0) += dh1.colwise().sum().transpose();
    dy += dh1 * lp.w1.v;

    Mat dsum1 = layer_norm_backward(dy, lp.ln1_gamma.v.col(0), lc.ln1,
                                    lp.ln1_gamma, lp.ln1_beta);
    Mat dx_res = dsum1;
    Mat dattn_proj = dsum1;
    if (lc.drop1.size() > 0) dattn_proj = (dattn_proj.array() * lc.drop1).matrix();

    lp.wo.g += dattn_proj.transpose() * lc.concat;
    lp.bo.g.col(0) += dattn_proj.colwise().sum().transpose();
    Mat dconcat = dattn_proj * lp.wo.v;

    Mat dq = Mat::Zero(dx_res.rows(), params.d_e);
    Mat dk = Mat::Zero(dx_res.rows(), params.d_e);
    Mat dv = Mat::Zero(dx_res.rows(), params.d_e);
    for (int h = 0; h < params.heads; ++h) {
      const Mat& a = cache.layers[li].attn[h];
      const auto doh = dconcat.middleCols(h * dh, dh);
      const auto vh = lc.v.middleCols(h * dh, dh);
      const auto qh = lc.q.middleCols(h * dh, dh);
      const auto kh = lc.k.middleCols(h * dh, dh);

      Mat da = doh * vh.transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * doh;
      // softmax backward, row-wise
      Mat ds(a.rows(), a.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const double dot = a.row(r).dot(da.row(r));
        ds.row(r) = (a.row(r).array() * (da.row(r).array() - dot)).matrix();
      }
      dq.middleCols(h * dh, dh) = ds * kh * scale;
      dk.middleCols(h * dh, dh) = ds.transpose() * qh * scale;
    }

    lp.wq.g += dq.transpose() * lc.x_in;
    lp.bq.g.col(0) += dq.colwise().sum().transpose();
    lp.wk.g += dk.transpose() * lc.x_in;
    lp.bk.g.col(0) += dk.colwise().sum().transpose();
    lp.wv.g += dv.transpose() * lc.x_in;
    lp.bv.g.col(0) += dv.colwise().sum().transpose();

    dx = dx_res + dq * lp.wq.v + dk * lp.wk.v + dv * lp.wv.v;
  }

  // indexed embedding: dx covers E_hat = E + HardTanh(E_pe + W_LN m_idx)
  Mat dpre = dx;
  for (Eigen::Index r = 0; r < dpre.rows(); ++r)
    for (Eigen::Index c = 0; c < dpre.cols(); ++c)
      if (std::abs(cache.pe_pre(r, c)) >= 1.0) dpre(r, c) = 0.0;

  params.e_pe.g += dpre;
  const Vec dpre_flat = flatten_rowmajor(dpre);
  params.w_ln.g += dpre_flat * cache.midx.transpose();

  const Vec de_flat = flatten_rowmajor(dx);
  params.w_in.g += de_flat * cache.saliency.transpose();
  params.b_in.g.col(0) += de_flat;
  const Vec dm = params.w_in.v.transpose() * de_flat;

  Mat dfeatures = Mat::Zero(cache.feature_channels, params.hw);
  saliency_backward(dm, cache.argmax, dfeatures);
  return dfeatures;
}

}  // namespace geodtr
