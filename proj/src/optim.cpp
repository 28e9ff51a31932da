#include "geodtr/optim.hpp"

#include <cmath>

namespace geodtr {

double cosine_lr(double base_lr, long step, long total_steps) {
  if (total_steps <= 0) return base_lr;
  if (step >= total_steps) return 0.0;
  if (step < 0) step = 0;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(3.141592653589793238463 * t));
}

void AdamW::update(const std::string& name, Tensor& param, double lr,
                   double weight_decay) {
  if (step_ < 1) throw std::logic_error("begin_step() must precede update()");
  auto [it, inserted] = moments_.try_emplace(name);
  auto& [m, v] = it->second;
  if (inserted) {
    m = Mat::Zero(param.v.rows(), param.v.cols());
    v = Mat::Zero(param.v.rows(), param.v.cols());
  }
  if (m.rows() != param.v.rows() || m.cols() != param.v.cols())
    throw std::invalid_argument("optimizer state shape mismatch for " + name);

  m = kBeta1 * m + (1.0 - kBeta1) * param.g;
  v = (kBeta2 * v.array() + (1.0 - kBeta2) * param.g.array().square()).matrix();

  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  param.v.array() -= lr * ((m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps) +
                           weight_decay * param.v.array());
}

void AdamW::restore(long step, std::map<std::string, std::pair<Mat, Mat>> moments) {
  step_ = step;
  moments_ = std::move(moments);
}

}  // namespace geodtr
