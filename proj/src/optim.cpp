#include "nnpde/optim.hpp"

#include <cmath>

namespace nnpde {

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adagrad: return "adagrad";
  }
  return "?";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  if (s == "adagrad") return OptimizerKind::adagrad;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

Optimizer::Optimizer(OptimizerConfig config, Eigen::Index size) : config_(config) {
  if (config_.kind != OptimizerKind::sgd) {
    v_ = Eigen::VectorXd::Zero(size);
    if (config_.kind == OptimizerKind::adam) m_ = Eigen::VectorXd::Zero(size);
  }
}

void Optimizer::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
  if (theta.size() != grad.size()) throw std::invalid_argument("gradient size does not match parameters");
  if (config_.kind != OptimizerKind::sgd && v_.size() != theta.size())
    throw std::invalid_argument("optimizer state size does not match parameters");
  for (Eigen::Index i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad(i)))
      throw NonFiniteError("non-finite gradient entry " + std::to_string(i) + " at step " + std::to_string(steps_ + 1));
  ++steps_;
  switch (config_.kind) {
    case OptimizerKind::sgd:
      theta -= lr * grad;
      break;
    case OptimizerKind::adam: {
      m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
      v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
      theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.adam_eps);
      break;
    }
    case OptimizerKind::adagrad:
      v_ += grad.cwiseAbs2();
      theta.array() -= lr * grad.array() / (v_.array().sqrt() + config_.adagrad_eps);
      break;
  }
}

double LRSchedule::at(long iteration) const {
  double lr = base_lr;
  for (const auto& [at_iter, mult] : milestones)
    if (iteration >= at_iter) lr *= mult;
  return lr;
}

}  // namespace nnpde
