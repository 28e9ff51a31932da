#pragma once

#include "geodtr/embedding.hpp"
#include "geodtr/rng.hpp"

#include <vector>

namespace geodtr {

struct LossConfig {
  double alpha = 10.0;
  double beta_ground = 5.0;
  double beta_aerial = 5.0;
  bool cf_enabled = true;

  void validate() const {
    if (alpha <= 0 || beta_ground <= 0 || beta_aerial <= 0)
      throw std::invalid_argument("loss sharpness parameters must be positive");
  }
};

/// Weighted soft-margin triplet loss: log(1 + exp(alpha * (d_pos - d_neg))).
double triplet_loss(double d_pos, double d_neg, double alpha);

/// Exhaustive mini-batch mining: mean over all 2N(N-1) directed triplets,
/// anchoring on the ground view and on the aerial view.
double batch_triplet_loss(const std::vector<Vec>& ground,
                          const std::vector<Vec>& aerial, double alpha);

/// Same value; additionally accumulates d(loss)/d(embedding) per item.
double batch_triplet_loss_grad(const std::vector<Vec>& ground,
                               const std::vector<Vec>& aerial, double alpha,
                               std::vector<Vec>& dground, std::vector<Vec>& daerial);

/// Imaginary layout descriptors, i.i.d. U[-1, 1], K x (H*W).
Mat sample_imaginary_descriptors(int k, int hw, Rng& rng);

/// Counterfactual penalty: log(1 + exp(-beta * d(f, f_hat))).
double counterfactual_loss(const ModulatedEmbedding& f,
                           const ModulatedEmbedding& f_hat, double beta);

/// Value plus d(loss)/dd for gradient assembly.
double counterfactual_loss_grad(double dist, double beta, double& ddist);

/// Numerically stable log(1 + exp(x)).
double softplus(double x);

/// Logistic sigmoid.
double sigmoid(double x);

}  // namespace geodtr
