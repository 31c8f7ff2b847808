#pragma once

#include <Eigen/Dense>

#include "memcurse/hessian/hessian.hpp"

namespace memcurse::experiments {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction on flat parameter vectors.
class Adam {
 public:
  Adam(Eigen::Index size, AdamConfig config = {});

  /// One update: params -= lr · m̂ / (√v̂ + ε).
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

  long step_count() const { return t_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  hessian::AdamProbe probe(double alpha) const;

 private:
  AdamConfig config_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

enum class Schedule { Constant, Cosine };

/// base for Constant; base·½(1 + cos(π·step/total)) for Cosine, step in [0, total).
double scheduled_lr(Schedule schedule, double base, long step, long total);

}  // namespace memcurse::experiments
