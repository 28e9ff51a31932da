#pragma once

#include "geodtr/types.hpp"

#include <map>
#include <string>

namespace geodtr {

/// Cosine decay from base_lr at step 0 to 0 at total_steps, nonincreasing.
double cosine_lr(double base_lr, long step, long total_steps);

/// AdamW: adaptive moments with decoupled weight decay,
/// theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta).
class AdamW {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  /// Applies one update to a named parameter from its gradient. The bias
  /// correction uses the step counter advanced by begin_step().
  void begin_step() { ++step_; }
  void update(const std::string& name, Tensor& param, double lr, double weight_decay);

  long step() const { return step_; }

  /// Moment access for checkpointing.
  const std::map<std::string, std::pair<Mat, Mat>>& moments() const { return moments_; }
  void restore(long step, std::map<std::string, std::pair<Mat, Mat>> moments);

 private:
  std::map<std::string, std::pair<Mat, Mat>> moments_;  // name -> (m, v)
  long step_ = 0;
};

}  // namespace geodtr
