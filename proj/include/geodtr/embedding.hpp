#pragma once

#include "geodtr/types.hpp"

#include <utility>

namespace geodtr {

/// Retrieval representation f of length C*K, descriptor-major:
/// f[m*C + j] = <p_m, r_j> (Frobenius inner product).
struct ModulatedEmbedding {
  Vec data;
  bool normalized = false;
};

ModulatedEmbedding modulate(const Mat& descriptors, const Mat& features);

ModulatedEmbedding normalize(const ModulatedEmbedding& f);

double distance(const ModulatedEmbedding& a, const ModulatedEmbedding& b);

/// d(normalized)/d(raw) pullback: maps a gradient on y = f/|f| to one on f.
Vec normalize_backward(const Vec& f_raw, const Vec& dy);

/// Accumulates gradients of sum(df .* f) into dp and/or dr (either may be
/// null). df is indexed like the modulated embedding.
void modulate_backward(const Vec& df, const Mat& descriptors, const Mat& features,
                       Mat* ddescriptors, Mat* dfeatures);

/// Gradients of the Euclidean distance with respect to both endpoints,
/// scaled by ddist. Zero at coincident points.
std::pair<Vec, Vec> distance_backward(const Vec& a, const Vec& b, double ddist);

}  // namespace geodtr
