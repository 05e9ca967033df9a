#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnpde {

enum class OptimizerKind { sgd, adam, adagrad };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double adagrad_eps = 1e-10;
};

/// Thrown when a gradient or loss stops being finite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First-order optimizer state over a flattened parameter vector.
///
///   sgd:     theta -= lr g
///   adam:    bias-corrected moments, theta -= lr mhat / (sqrt(vhat) + eps)
///   adagrad: acc += g^2, theta -= lr g / (sqrt(acc) + eps)
///
/// Ascent is a descent step on -g.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, Eigen::Index size);

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr);

  const OptimizerConfig& config() const { return config_; }
  long step_count() const { return steps_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  /// Second moment for adam, squared-gradient accumulator for adagrad.
  const Eigen::VectorXd& second_moment() const { return v_; }

 private:
  OptimizerConfig config_;
  Eigen::VectorXd m_, v_;
  long steps_ = 0;
};

/// lr(k) = base * product of the multipliers whose milestone is <= k.
struct LRSchedule {
  double base_lr = 1e-3;
  std::vector<std::pair<long, double>> milestones;

  double at(long iteration) const;
};

}  // namespace nnpde
