#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "nnpde/net.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

enum class Precision { float32, float64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

/// What a loss needs from a field at each point besides its value.
struct Need {
  bool grad = false;
  bool diffusion = false;  // sum_ij a_ij d_ij u for the problem's A
};

/// Per-point quantities over a batch of B points. Members not requested are empty.
/// The same struct carries adjoints in `Model::backward`.
struct FieldValues {
  Eigen::VectorXd value;      // B
  Eigen::MatrixXd grad;       // d x B
  Eigen::VectorXd diffusion;  // B
};

/// The second-order part of the operator, as needed for sum_ij a_ij H_ij.
struct DiffusionOperator {
  std::optional<Eigen::MatrixXd> constant;
  std::function<Eigen::MatrixXd(ConstVecRef)> A;

  static DiffusionOperator from(const PDEProblem& problem);
  static DiffusionOperator identity(int d);
};

/// A scalar field u(x; theta) with batched evaluation and reverse-mode
/// parameter gradients. Fixed fields (analytic functions, frozen networks)
/// have no parameters and ignore `backward`.
class Model {
 public:
  virtual ~Model() = default;
  virtual int dim() const = 0;
  virtual Eigen::Index parameter_count() const = 0;
  /// points: d x B. With `tape`, `backward` may follow for this batch.
  virtual void eval(const Eigen::Ref<const Eigen::MatrixXd>& points, Need need, bool tape, FieldValues& out) = 0;
  /// Accumulates d(sum adjoint . out)/dtheta into grad for the last taped batch.
  virtual void backward(const FieldValues& adjoint, Eigen::Ref<Eigen::VectorXd> grad) = 0;
  /// Re-reads parameters after the owner changed them.
  virtual void sync() {}
};

/// Network-backed model. Holds a reference to `params` (the double master copy)
/// and evaluates in the requested precision; call sync() after updating params.
std::unique_ptr<Model> make_net_model(const NetworkParams<double>& params, Precision precision,
                                      DiffusionOperator diffusion);

/// Frozen network with its own copy of the parameters.
std::unique_ptr<Model> make_frozen_net_model(NetworkParams<double> params, DiffusionOperator diffusion);

/// An analytic function; `f` must provide grad/hess when they are requested.
std::unique_ptr<Model> make_function_model(int d, PointEval f, DiffusionOperator diffusion);

/// w(x) = prod_i x_i (1 - x_i), vanishing on the boundary of the unit hypercube.
std::unique_ptr<Model> make_hypercube_cutoff(int d);

/// u = inner * cutoff + lift (either factor optional). Value and gradient only.
std::unique_ptr<Model> make_product_model(std::unique_ptr<Model> inner, std::shared_ptr<Model> cutoff,
                                          std::shared_ptr<Model> lift);

/// Chunked evaluation of all columns of `points`.
FieldValues eval_all(Model& model, const Eigen::Ref<const Eigen::MatrixXd>& points, Need need);

/// Chunked taped re-evaluation followed by backward with the matching slice of `adjoint`.
void backprop_all(Model& model, const Eigen::Ref<const Eigen::MatrixXd>& points, Need need,
                  const FieldValues& adjoint, Eigen::Ref<Eigen::VectorXd> grad);

inline constexpr Eigen::Index kChunk = 512;

}  // namespace nnpde
