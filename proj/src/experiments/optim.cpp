#include "memcurse/experiments/optim.hpp"

#include <cmath>
#include <numbers>

#include "memcurse/errors.hpp"

namespace memcurse::experiments {

Adam::Adam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw DimensionError("Adam::step: size mismatch");
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
}

hessian::AdamProbe Adam::probe(double alpha) const {
  return {v_, t_, alpha, config_.eps, config_.beta2};
}

double scheduled_lr(Schedule schedule, double base, long step, long total) {
  if (schedule == Schedule::Constant) return base;
  if (total <= 0) throw DomainError("scheduled_lr: total steps must be positive");
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                                      static_cast<double>(total)));
}

}  // namespace memcurse::experiments
