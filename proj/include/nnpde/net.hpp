#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nnpde {

enum class Activation { tanh, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Fully-connected feedforward architecture. widths = {n_0 = d, n_1, ..., n_L = 1}.
struct NetworkArch {
  std::vector<int> widths;
  Activation activation = Activation::tanh;

  int input_dim() const { return widths.front(); }
  int depth() const { return static_cast<int>(widths.size()) - 1; }
  int parameter_count() const;
  void validate() const;

  /// Convenience: d inputs, the given hidden widths, one output.
  static NetworkArch mlp(int d, const std::vector<int>& hidden, Activation act);
};

/// Weights and biases stored in one flat vector.
///
/// Layout (fixed): layer-major, for layer l = 1..L the weight matrix
/// W^(l) (n_l x n_{l-1}, column-major) followed by the bias b^(l) (n_l).
template <typename Scalar>
class NetworkParams {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  NetworkParams() = default;
  explicit NetworkParams(NetworkArch arch);
  NetworkParams(NetworkArch arch, Vector theta);

  const NetworkArch& arch() const { return arch_; }
  int depth() const { return arch_.depth(); }
  Eigen::Index size() const { return theta_.size(); }

  Vector& theta() { return theta_; }
  const Vector& theta() const { return theta_; }

  /// Layers are numbered 1..L as in the recursion u^(l) = rho(W^(l) u^(l-1) + b^(l)).
  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const Vector> bias(int layer) const;
  Eigen::Map<Vector> bias(int layer);
  Eigen::Index weight_offset(int layer) const { return offsets_[layer - 1]; }
  Eigen::Index bias_offset(int layer) const;

  Scalar max_abs_weight() const;
  /// Membership in the class with weights bounded by R; checked on demand only.
  bool within_bound(Scalar bound) const { return max_abs_weight() <= bound; }

  template <typename Other>
  NetworkParams<Other> cast() const {
    return NetworkParams<Other>(arch_, theta_.template cast<Other>());
  }

 private:
  void compute_offsets();

  NetworkArch arch_;
  Vector theta_;
  std::vector<Eigen::Index> offsets_;
};

/// Symmetric uniform initialisation U[-s, s], s = sqrt(6 / (n_{l-1} + n_l)); zero biases.
template <typename Scalar = double>
NetworkParams<Scalar> init_params(const NetworkArch& arch, std::uint64_t seed);

/// Carrier for u, grad_x u and the spatial Hessian. Absent parts were not requested.
struct EvalResult {
  double value = 0.0;
  std::optional<Eigen::VectorXd> grad;
  std::optional<Eigen::MatrixXd> hess;
};

/// Which spatial derivative channels the jet propagation carries.
///
/// First-order channels are directional derivatives D_k u = v_k . grad u for the
/// columns v_k of `directions`. Second-order channels are v_a^T H v_b for each
/// (a, b) in `pairs`. Channel order per point: value, first-order, second-order.
struct JetLayout {
  Eigen::MatrixXd directions;            // d x p
  std::vector<std::pair<int, int>> pairs;

  int dim() const { return static_cast<int>(directions.rows()); }
  int first_order() const { return static_cast<int>(directions.cols()); }
  int second_order() const { return static_cast<int>(pairs.size()); }
  int channels() const { return 1 + first_order() + second_order(); }

  static JetLayout value_only(int d);
  static JetLayout gradient(int d);
  static JetLayout full_hessian(int d);
  /// Directional derivatives along the columns of an orthonormal basis, plus
  /// the pure second derivatives along each column (enough for tr(A H) with
  /// A = V diag(lambda) V^T).
  static JetLayout along_basis(const Eigen::MatrixXd& basis, bool with_second);
};

/// Batched forward propagation of value/first/second derivative channels,
/// with a recorded tape for reverse-mode differentiation in the parameters.
///
/// Not thread-safe; one evaluator per thread. The network must outlive it.
template <typename Scalar>
class JetEvaluator {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  JetEvaluator(const NetworkParams<Scalar>& net, JetLayout layout);

  const JetLayout& layout() const { return layout_; }

  /// points: d x B. Returns B x C with one column per channel.
  Eigen::Map<const Matrix> forward(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   bool record_tape = true);

  /// Adds d/dtheta sum_{b,c} adjoint(b,c) * output(b,c) to `grad` for the
  /// batch of the last taped forward call. adjoint: B x C.
  void backward(const Eigen::Ref<const Matrix>& adjoint, Eigen::Ref<Vector> grad);

 private:
  void activate(int layer, bool record_tape);

  const NetworkParams<Scalar>* net_;
  JetLayout layout_;
  Eigen::Index batch_ = 0;
  bool taped_ = false;
  Matrix input_;                 // d x (C B)
  std::vector<Matrix> post_;     // hidden layer outputs, n_l x (C B)
  std::vector<Matrix> pre_;      // hidden preactivations (derivative blocks used in backward)
  std::vector<Matrix> s1_, s2_, s3_;
  Matrix out_;                   // 1 x (C B)
  Matrix dy_, dz_;               // backward workspaces
};

/// u_theta(x).
template <typename Scalar>
double forward(const NetworkParams<Scalar>& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Values at the columns of `points` (d x B).
template <typename Scalar>
Eigen::VectorXd forward_batch(const NetworkParams<Scalar>& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Exact spatial gradient and Hessian by layer-wise propagation.
template <typename Scalar>
EvalResult eval_with_derivatives(const NetworkParams<Scalar>& net,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, bool want_grad,
                                 bool want_hess);

/// A scalar functional of the network through its values/gradients/Hessians at
/// finitely many points. `evaluate` receives the network results at each point
/// and returns the functional value, filling `seed` with dF/d(result) in the
/// same shape (value, grad entries, Hessian entries).
struct PointFunctional {
  Eigen::MatrixXd points;  // d x B
  bool needs_grad = false;
  bool needs_hess = false;
  std::function<double(const std::vector<EvalResult>& results, std::vector<EvalResult>& seed)>
      evaluate;
};

/// Exact gradient of the functional in the flattened parameter layout.
/// Throws std::invalid_argument when the seed uses a primitive that was not requested.
template <typename Scalar>
std::pair<double, Eigen::VectorXd> param_gradient(const NetworkParams<Scalar>& net,
                                                  const PointFunctional& functional);

/// Text checkpoint: arch line, activation, parameter count, then one parameter
/// per line with 17 significant digits.
void write_checkpoint(std::ostream& os, const NetworkParams<double>& net);
NetworkParams<double> read_checkpoint(std::istream& is);

}  // namespace nnpde
