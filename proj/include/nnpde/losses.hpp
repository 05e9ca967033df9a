#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "nnpde/geom.hpp"
#include "nnpde/mesh.hpp"
#include "nnpde/model.hpp"
#include "nnpde/optim.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

/// value = interior + alpha * boundary. `boundary` is reported without alpha.
struct LossValueGrad {
  double value = 0.0;
  double interior = 0.0;
  double boundary = 0.0;
  Eigen::VectorXd grad;  // empty unless requested
};

enum class BoundaryMode { penalty, cutoff, lift };

/// How Dirichlet data enters a trial or test function.
///   penalty: the raw network, boundary mismatch penalized with weight alpha
///   cutoff:  network * w with w = 0 on the boundary
///   lift:    network * w + u_g with u_g matching the boundary data
struct BoundaryEnforcement {
  BoundaryMode mode = BoundaryMode::penalty;
  double alpha = 1.0;
  std::shared_ptr<Model> cutoff;
  std::shared_ptr<Model> lift;

  static BoundaryEnforcement penalty(double alpha);
  static BoundaryEnforcement with_cutoff(std::shared_ptr<Model> w);
  static BoundaryEnforcement with_lift(std::shared_ptr<Model> w, std::shared_ptr<Model> lift);

  /// Wraps the network model according to the mode (penalty returns it as is).
  std::unique_ptr<Model> apply(std::unique_ptr<Model> net) const;
};

/// (|Omega|/n) sum R(X_i)^2 + alpha (|dOmega|/m) sum (u - g)(Y_j)^2 with R the
/// strong residual. Problem data at the samples is precomputed.
class PinnLoss {
 public:
  PinnLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha);
  LossValueGrad operator()(Model& u, bool with_grad = true) const;

 private:
  Eigen::MatrixXd x_, y_;
  Eigen::MatrixXd drift_;  // beta - div A, d x n
  Eigen::VectorXd c_, f_, g_;
  double wi_, wb_, alpha_;
};

/// (|Omega|/n) sum (grad u^T A grad u + c u^2 - f u)(X_i) + alpha (|dOmega|/m) sum (u - g)^2.
/// Requires beta = 0.
class DrmLoss {
 public:
  DrmLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha);
  LossValueGrad operator()(Model& u, bool with_grad = true) const;

 private:
  Eigen::MatrixXd x_, y_;
  std::optional<Eigen::MatrixXd> A_const_;
  std::vector<Eigen::MatrixXd> A_;
  Eigen::VectorXd c_, f_, g_;
  double wi_, wb_, alpha_;
};

struct WanValueGrad {
  double value = 0.0;      // interior + alpha * boundary
  double interior = 0.0;   // <A[u], phi>^2 / |phi|_{H1}^2
  double boundary = 0.0;   // (1/m) sum (u - g)^2
  double pairing = 0.0;    // <A[u], phi>
  double norm2 = 0.0;      // |phi|_{H1}^2
  Eigen::VectorXd grad_u, grad_phi;
};

/// Weak adversarial loss. <A[u], phi> = int grad u^T A grad phi + (beta . grad u) phi
/// + c u phi - f phi and |phi|^2 = int phi^2 + |grad phi|^2, both Monte Carlo
/// estimates over the same interior samples. The boundary term is a plain average.
class WanLoss {
 public:
  WanLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha);
  WanValueGrad operator()(Model& u, Model& phi, bool grad_u, bool grad_phi) const;

 private:
  Eigen::MatrixXd x_, y_;
  std::optional<Eigen::MatrixXd> A_const_;
  std::vector<Eigen::MatrixXd> A_;
  Eigen::MatrixXd beta_;
  Eigen::VectorXd c_, f_, g_;
  double wi_, alpha_;
};

/// sum_i alpha_i r_i^2 with r the Monte Carlo P1 residuals of the model.
class VpinnLoss {
 public:
  VpinnLoss(const ResidualAssembler& assembler, Eigen::VectorXd alpha);
  LossValueGrad operator()(Model& u, bool with_grad = true) const;

 private:
  const ResidualAssembler* assembler_;
  Eigen::VectorXd alpha_;
};

LossValueGrad pinn_loss(Model& u, const PDEProblem& problem, const SampleSet& interior,
                        const SampleSet& boundary, double alpha, bool with_grad = true);
LossValueGrad drm_loss(Model& u, const PDEProblem& problem, const SampleSet& interior,
                       const SampleSet& boundary, double alpha, bool with_grad = true);
WanValueGrad wan_loss(Model& u, Model& phi, const PDEProblem& problem, const SampleSet& interior,
                      const SampleSet& boundary, double alpha);

struct PretrainOptions {
  double stop_rel_error = 1e-3;
  long max_iterations = 40000;
  LRSchedule schedule{5e-3, {{15000, 0.2}, {25000, 0.2}}};
  OptimizerConfig optimizer;
};

struct PretrainResult {
  NetworkParams<double> params;
  double rel_error = 0.0;  // sqrt(sum (u - t)^2 / sum t^2), absolute RMS if t = 0
  long iterations = 0;
  bool converged = false;
};

/// Least-squares fit of a network to target values at the given points.
PretrainResult pretrain_boundary_net(NetworkParams<double> init, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& target, const PretrainOptions& options);

}  // namespace nnpde
