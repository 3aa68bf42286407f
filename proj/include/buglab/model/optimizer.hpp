#pragma once

// Adam with linear learning-rate warmup and global-norm gradient clipping.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "buglab/model/parameters.hpp"

namespace buglab {

struct NonFiniteGradientError : std::runtime_error {
  NonFiniteGradientError() : std::runtime_error("non-finite gradient encountered") {}
};

struct OptimizerConfig {
  double learning_rate = 1e-4;
  int warmup_steps = 800;
  double clip_norm = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(ModelParameters& params, OptimizerConfig cfg = {})
      : p_(params), cfg_(cfg) {
    for (size_t i = 0; i < p_.count(); ++i) {
      m_.push_back(Mat::Zero(p_.value_at(i).rows(), p_.value_at(i).cols()));
      v_.push_back(Mat::Zero(p_.value_at(i).rows(), p_.value_at(i).cols()));
    }
  }

  int step_count() const { return step_; }

  // consumes the accumulated gradients and zeroes them
  void step() {
    double norm = p_.grad_norm();
    if (!std::isfinite(norm)) throw NonFiniteGradientError();
    double scale = (cfg_.clip_norm > 0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm : 1.0;
    ++step_;
    double lr = cfg_.learning_rate;
    if (cfg_.warmup_steps > 0 && step_ < cfg_.warmup_steps)
      lr *= static_cast<double>(step_) / static_cast<double>(cfg_.warmup_steps);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
    for (size_t i = 0; i < p_.count(); ++i) {
      Mat g = p_.grad_at(i) * scale;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i].array().matrix() + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
      Mat mhat = m_[i] / bc1;
      Mat vhat = v_[i] / bc2;
      p_.value_at(i).array() -= lr * mhat.array() / (vhat.array().sqrt() + cfg_.epsilon);
      p_.grad_at(i).setZero();
    }
  }

 private:
  ModelParameters& p_;
  OptimizerConfig cfg_;
  std::vector<Mat> m_, v_;
  int step_ = 0;
};

}  // namespace buglab
