#include "nnpde/net.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nnpde/rng.hpp"

namespace nnpde {

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "sigmoid"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

int NetworkArch::parameter_count() const {
  int count = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) count += widths[l] * (widths[l - 1] + 1);
  return count;
}

void NetworkArch::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("network needs at least one layer");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
  if (widths.back() != 1) throw std::invalid_argument("output width must be 1");
}

NetworkArch NetworkArch::mlp(int d, const std::vector<int>& hidden, Activation act) {
  NetworkArch arch;
  arch.widths.push_back(d);
  arch.widths.insert(arch.widths.end(), hidden.begin(), hidden.end());
  arch.widths.push_back(1);
  arch.activation = act;
  arch.validate();
  return arch;
}

// ---------------------------------------------------------------------------
// NetworkParams

template <typename Scalar>
NetworkParams<Scalar>::NetworkParams(NetworkArch arch) : arch_(std::move(arch)) {
  arch_.validate();
  theta_ = Vector::Zero(arch_.parameter_count());
  compute_offsets();
}

template <typename Scalar>
NetworkParams<Scalar>::NetworkParams(NetworkArch arch, Vector theta)
    : arch_(std::move(arch)), theta_(std::move(theta)) {
  arch_.validate();
  if (theta_.size() != arch_.parameter_count())
    throw std::invalid_argument("parameter vector does not match architecture");
  compute_offsets();
}

template <typename Scalar>
void NetworkParams<Scalar>::compute_offsets() {
  offsets_.clear();
  Eigen::Index off = 0;
  for (int l = 1; l <= arch_.depth(); ++l) {
    offsets_.push_back(off);
    off += static_cast<Eigen::Index>(arch_.widths[l]) * (arch_.widths[l - 1] + 1);
  }
}

template <typename Scalar>
Eigen::Index NetworkParams<Scalar>::bias_offset(int layer) const {
  return offsets_[layer - 1] + static_cast<Eigen::Index>(arch_.widths[layer]) * arch_.widths[layer - 1];
}

template <typename Scalar>
auto NetworkParams<Scalar>::weight(int layer) const -> Eigen::Map<const Matrix> {
  return {theta_.data() + weight_offset(layer), arch_.widths[layer], arch_.widths[layer - 1]};
}

template <typename Scalar>
auto NetworkParams<Scalar>::weight(int layer) -> Eigen::Map<Matrix> {
  return {theta_.data() + weight_offset(layer), arch_.widths[layer], arch_.widths[layer - 1]};
}

template <typename Scalar>
auto NetworkParams<Scalar>::bias(int layer) const -> Eigen::Map<const Vector> {
  return {theta_.data() + bias_offset(layer), arch_.widths[layer]};
}

template <typename Scalar>
auto NetworkParams<Scalar>::bias(int layer) -> Eigen::Map<Vector> {
  return {theta_.data() + bias_offset(layer), arch_.widths[layer]};
}

template <typename Scalar>
Scalar NetworkParams<Scalar>::max_abs_weight() const {
  return theta_.size() == 0 ? Scalar(0) : theta_.cwiseAbs().maxCoeff();
}

template <typename Scalar>
NetworkParams<Scalar> init_params(const NetworkArch& arch, std::uint64_t seed) {
  NetworkParams<Scalar> net(arch);
  Rng rng(seed, streams::init);
  for (int l = 1; l <= arch.depth(); ++l) {
    const double s = std::sqrt(6.0 / (arch.widths[l - 1] + arch.widths[l]));
    auto w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(rng.uniform(-s, s));
    net.bias(l).setZero();
  }
  return net;
}

// ---------------------------------------------------------------------------
// JetLayout

JetLayout JetLayout::value_only(int d) { return {Eigen::MatrixXd(d, 0), {}}; }

JetLayout JetLayout::gradient(int d) { return {Eigen::MatrixXd::Identity(d, d), {}}; }

JetLayout JetLayout::full_hessian(int d) {
  JetLayout layout{Eigen::MatrixXd::Identity(d, d), {}};
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) layout.pairs.emplace_back(a, b);
  return layout;
}

JetLayout JetLayout::along_basis(const Eigen::MatrixXd& basis, bool with_second) {
  JetLayout layout{basis, {}};
  if (with_second)
    for (int k = 0; k < basis.cols(); ++k) layout.pairs.emplace_back(k, k);
  return layout;
}

// ---------------------------------------------------------------------------
// Activation kernels

namespace {

template <typename Scalar, typename In, typename Out>
void tanh_into(const In& z, Out&& y) {
  if constexpr (std::is_same_v<Scalar, float>) {
    y = z.tanh();
  } else {
    // Eigen 3.4 only vectorises tanh for float; exp is vectorised for double.
    auto e = (Scalar(-2) * z.abs()).exp().eval();
    y = z.sign() * (Scalar(1) - e) / (Scalar(1) + e);
    // Taylor series near zero avoids the cancellation in 1 - e.
    auto z2 = (z * z).eval();
    auto series = z * (1.0 + z2 * (-1.0 / 3 + z2 * (2.0 / 15 + z2 * (-17.0 / 315 + z2 * (62.0 / 2835 +
                  z2 * (-1382.0 / 155925 + z2 * (21844.0 / 6081075)))))));
    y = (z.abs() < Scalar(0.0625)).select(series, y);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JetEvaluator

template <typename Scalar>
JetEvaluator<Scalar>::JetEvaluator(const NetworkParams<Scalar>& net, JetLayout layout)
    : net_(&net), layout_(std::move(layout)) {
  if (layout_.dim() != net.arch().input_dim())
    throw std::invalid_argument("jet layout dimension does not match network input");
  for (auto [a, b] : layout_.pairs)
    if (a < 0 || b < 0 || a >= layout_.first_order() || b >= layout_.first_order())
      throw std::invalid_argument("jet layout pair references unknown direction");
  const int hidden = net.depth() - 1;
  post_.resize(hidden);
  pre_.resize(hidden);
  s1_.resize(hidden);
  s2_.resize(hidden);
  s3_.resize(hidden);
}

template <typename Scalar>
void JetEvaluator<Scalar>::activate(int layer, bool record_tape) {
  const Eigen::Index B = batch_;
  const int p = layout_.first_order();
  const int q = layout_.second_order();
  const int C = layout_.channels();
  Matrix& Z = pre_[layer - 1];
  Matrix& Y = post_[layer - 1];
  Matrix& s1 = s1_[layer - 1];
  Matrix& s2 = s2_[layer - 1];
  Matrix& s3 = s3_[layer - 1];
  const Eigen::Index n = Z.rows();
  Y.resize(n, C * B);

  auto z0 = Z.leftCols(B).array();
  auto y0 = Y.leftCols(B).array();
  if (net_->arch().activation == Activation::tanh) {
    tanh_into<Scalar>(z0, y0);
    s1 = (Scalar(1) - y0 * y0).matrix();
    const bool need_s2 = q > 0 || (record_tape && p > 0);
    if (need_s2) s2 = (Scalar(-2) * y0 * s1.array()).matrix();
    if (record_tape && q > 0) s3 = ((Scalar(6) * y0 * y0 - Scalar(2)) * s1.array()).matrix();
  } else {
    y0 = Scalar(1) / (Scalar(1) + (-z0).exp());
    s1 = (y0 * (Scalar(1) - y0)).matrix();
    const bool need_s2 = q > 0 || (record_tape && p > 0);
    if (need_s2) s2 = (s1.array() * (Scalar(1) - Scalar(2) * y0)).matrix();
    if (record_tape && q > 0)
      s3 = (s1.array() * (Scalar(1) - Scalar(6) * y0 + Scalar(6) * y0 * y0)).matrix();
  }

  for (int k = 0; k < p; ++k)
    Y.middleCols((1 + k) * B, B).array() = s1.array() * Z.middleCols((1 + k) * B, B).array();
  for (int j = 0; j < q; ++j) {
    const auto [a, b] = layout_.pairs[j];
    Y.middleCols((1 + p + j) * B, B).array() =
        s2.array() * Z.middleCols((1 + a) * B, B).array() * Z.middleCols((1 + b) * B, B).array() +
        s1.array() * Z.middleCols((1 + p + j) * B, B).array();
  }
}

template <typename Scalar>
auto JetEvaluator<Scalar>::forward(const Eigen::Ref<const Eigen::MatrixXd>& points, bool record_tape)
    -> Eigen::Map<const Matrix> {
  if (points.rows() != layout_.dim()) throw std::invalid_argument("point dimension mismatch");
  const Eigen::Index B = points.cols();
  const int p = layout_.first_order();
  const int C = layout_.channels();
  batch_ = B;
  taped_ = record_tape;

  input_.resize(layout_.dim(), C * B);
  input_.leftCols(B) = points.template cast<Scalar>();
  for (int k = 0; k < p; ++k)
    input_.middleCols((1 + k) * B, B).colwise() = layout_.directions.col(k).template cast<Scalar>();
  if (layout_.second_order() > 0) input_.rightCols((C - 1 - p) * B).setZero();

  const int L = net_->depth();
  const Matrix* prev = &input_;
  for (int l = 1; l < L; ++l) {
    Matrix& Z = pre_[l - 1];
    Z.noalias() = net_->weight(l) * (*prev);
    Z.leftCols(B).colwise() += net_->bias(l);
    activate(l, record_tape);
    prev = &post_[l - 1];
  }
  out_.noalias() = net_->weight(L) * (*prev);
  out_.leftCols(B).array() += net_->bias(L)(0);
  return {out_.data(), B, C};
}

template <typename Scalar>
void JetEvaluator<Scalar>::backward(const Eigen::Ref<const Matrix>& adjoint, Eigen::Ref<Vector> grad) {
  if (!taped_) throw std::logic_error("backward called without a taped forward pass");
  const Eigen::Index B = batch_;
  const int p = layout_.first_order();
  const int q = layout_.second_order();
  const int C = layout_.channels();
  if (adjoint.rows() != B || adjoint.cols() != C)
    throw std::invalid_argument("adjoint shape does not match the last forward pass");
  if (grad.size() != net_->size()) throw std::invalid_argument("gradient size mismatch");

  const int L = net_->depth();
  Matrix obar(1, C * B);
  for (int c = 0; c < C; ++c) obar.middleCols(c * B, B) = adjoint.col(c).transpose();

  auto layer_grads = [&](int l, const Matrix& delta, const Matrix& prev) {
    Eigen::Map<Matrix> gw(grad.data() + net_->weight_offset(l), net_->arch().widths[l],
                          net_->arch().widths[l - 1]);
    Eigen::Map<Vector> gb(grad.data() + net_->bias_offset(l), net_->arch().widths[l]);
    gw.noalias() += delta * prev.transpose();
    gb += delta.leftCols(B).rowwise().sum();
  };

  const Matrix& last_in = L > 1 ? post_[L - 2] : input_;
  layer_grads(L, obar, last_in);
  if (L == 1) return;
  dy_.noalias() = net_->weight(L).transpose() * obar;

  for (int l = L - 1; l >= 1; --l) {
    const Matrix& Z = pre_[l - 1];
    const auto s1 = s1_[l - 1].array();
    const Eigen::Index n = Z.rows();
    dz_.resize(n, C * B);

    for (int c = 1; c < C; ++c)
      dz_.middleCols(c * B, B).array() = s1 * dy_.middleCols(c * B, B).array();
    auto dz0 = dz_.leftCols(B).array();
    dz0 = s1 * dy_.leftCols(B).array();
    if (p > 0) {
      const auto s2 = s2_[l - 1].array();
      Matrix acc = Matrix::Zero(n, B);
      for (int k = 0; k < p; ++k)
        acc.array() += dy_.middleCols((1 + k) * B, B).array() * Z.middleCols((1 + k) * B, B).array();
      for (int j = 0; j < q; ++j) {
        const auto [a, b] = layout_.pairs[j];
        const auto d2 = dy_.middleCols((1 + p + j) * B, B).array();
        const auto za = Z.middleCols((1 + a) * B, B).array();
        const auto zb = Z.middleCols((1 + b) * B, B).array();
        dz_.middleCols((1 + a) * B, B).array() += s2 * d2 * zb;
        dz_.middleCols((1 + b) * B, B).array() += s2 * d2 * za;
        acc.array() += d2 * Z.middleCols((1 + p + j) * B, B).array();
      }
      dz0 += s2 * acc.array();
      if (q > 0) {
        const auto s3 = s3_[l - 1].array();
        acc.setZero();
        for (int j = 0; j < q; ++j) {
          const auto [a, b] = layout_.pairs[j];
          acc.array() += dy_.middleCols((1 + p + j) * B, B).array() *
                         Z.middleCols((1 + a) * B, B).array() * Z.middleCols((1 + b) * B, B).array();
        }
        dz0 += s3 * acc.array();
      }
    }

    const Matrix& prev = l > 1 ? post_[l - 2] : input_;
    layer_grads(l, dz_, prev);
    if (l > 1) dy_.noalias() = net_->weight(l).transpose() * dz_;
  }
}

// ---------------------------------------------------------------------------
// Point evaluation helpers

template <typename Scalar>
double forward(const NetworkParams<Scalar>& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != net.arch().input_dim()) throw std::invalid_argument("input dimension mismatch");
  JetEvaluator<Scalar> jet(net, JetLayout::value_only(net.arch().input_dim()));
  return static_cast<double>(jet.forward(x, false)(0, 0));
}

template <typename Scalar>
Eigen::VectorXd forward_batch(const NetworkParams<Scalar>& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (points.rows() != net.arch().input_dim()) throw std::invalid_argument("input dimension mismatch");
  constexpr Eigen::Index chunk = 2048;
  Eigen::VectorXd values(points.cols());
  JetEvaluator<Scalar> jet(net, JetLayout::value_only(net.arch().input_dim()));
  for (Eigen::Index start = 0; start < points.cols(); start += chunk) {
    const Eigen::Index len = std::min(chunk, points.cols() - start);
    values.segment(start, len) = jet.forward(points.middleCols(start, len), false).col(0).template cast<double>();
  }
  return values;
}

namespace {

JetLayout layout_for(int d, bool want_grad, bool want_hess) {
  if (want_hess) return JetLayout::full_hessian(d);
  if (want_grad) return JetLayout::gradient(d);
  return JetLayout::value_only(d);
}

template <typename Row>
EvalResult unpack(const Row& row, int d, bool want_grad, bool want_hess) {
  EvalResult r;
  r.value = static_cast<double>(row(0));
  if (want_grad || want_hess) {
    Eigen::VectorXd g(d);
    for (int k = 0; k < d; ++k) g(k) = static_cast<double>(row(1 + k));
    if (want_grad) r.grad = g;
  }
  if (want_hess) {
    Eigen::MatrixXd h(d, d);
    int idx = 1 + d;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        h(a, b) = h(b, a) = static_cast<double>(row(idx));
        ++idx;
      }
    r.hess = h;
  }
  return r;
}

}  // namespace

template <typename Scalar>
EvalResult eval_with_derivatives(const NetworkParams<Scalar>& net,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, bool want_grad,
                                 bool want_hess) {
  const int d = net.arch().input_dim();
  if (x.size() != d) throw std::invalid_argument("input dimension mismatch");
  JetEvaluator<Scalar> jet(net, layout_for(d, want_grad, want_hess));
  auto out = jet.forward(x, false);
  return unpack(out.row(0), d, want_grad, want_hess);
}

template <typename Scalar>
std::pair<double, Eigen::VectorXd> param_gradient(const NetworkParams<Scalar>& net,
                                                  const PointFunctional& functional) {
  const int d = net.arch().input_dim();
  const bool want_grad = functional.needs_grad;
  const bool want_hess = functional.needs_hess;
  JetEvaluator<Scalar> jet(net, layout_for(d, want_grad || want_hess, want_hess));
  auto out = jet.forward(functional.points, true);
  const Eigen::Index B = out.rows();

  std::vector<EvalResult> results(B), seeds(B);
  for (Eigen::Index i = 0; i < B; ++i) results[i] = unpack(out.row(i), d, want_grad, want_hess);
  const double value = functional.evaluate(results, seeds);
  if (static_cast<Eigen::Index>(seeds.size()) != B)
    throw std::invalid_argument("functional seed has the wrong number of points");

  typename JetEvaluator<Scalar>::Matrix adjoint =
      JetEvaluator<Scalar>::Matrix::Zero(B, jet.layout().channels());
  for (Eigen::Index i = 0; i < B; ++i) {
    const EvalResult& s = seeds[i];
    adjoint(i, 0) = static_cast<Scalar>(s.value);
    if (s.grad) {
      if (!want_grad) throw std::invalid_argument("functional seeds the gradient, which was not requested");
      for (int k = 0; k < d; ++k) adjoint(i, 1 + k) = static_cast<Scalar>((*s.grad)(k));
    }
    if (s.hess) {
      if (!want_hess) throw std::invalid_argument("functional seeds the Hessian, which was not requested");
      int idx = 1 + d;
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          const double h = a == b ? (*s.hess)(a, a) : (*s.hess)(a, b) + (*s.hess)(b, a);
          adjoint(i, idx++) = static_cast<Scalar>(h);
        }
    }
  }
  typename NetworkParams<Scalar>::Vector grad = NetworkParams<Scalar>::Vector::Zero(net.size());
  jet.backward(adjoint, grad);
  return {value, grad.template cast<double>()};
}

// ---------------------------------------------------------------------------
// Checkpoints

void write_checkpoint(std::ostream& os, const NetworkParams<double>& net) {
  os << "nnpde-checkpoint 1\nwidths";
  for (int w : net.arch().widths) os << ' ' << w;
  os << "\nactivation " << to_string(net.arch().activation) << "\nparameters " << net.size() << '\n';
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < net.size(); ++i) os << net.theta()(i) << '\n';
}

NetworkParams<double> read_checkpoint(std::istream& is) {
  std::string line, tag;
  auto next_line = [&]() {
    if (!std::getline(is, line)) throw std::runtime_error("checkpoint truncated");
    return std::istringstream(line);
  };
  {
    auto ls = next_line();
    int version = 0;
    ls >> tag >> version;
    if (tag != "nnpde-checkpoint" || version != 1) throw std::runtime_error("not an nnpde checkpoint");
  }
  NetworkArch arch;
  {
    auto ls = next_line();
    ls >> tag;
    if (tag != "widths") throw std::runtime_error("checkpoint: expected widths");
    int w;
    while (ls >> w) arch.widths.push_back(w);
  }
  {
    auto ls = next_line();
    std::string act;
    ls >> tag >> act;
    if (tag != "activation") throw std::runtime_error("checkpoint: expected activation");
    arch.activation = activation_from_string(act);
  }
  Eigen::Index count = 0;
  {
    auto ls = next_line();
    ls >> tag >> count;
    if (tag != "parameters") throw std::runtime_error("checkpoint: expected parameter count");
  }
  arch.validate();
  if (count != arch.parameter_count()) throw std::runtime_error("checkpoint: parameter count mismatch");
  Eigen::VectorXd theta(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    auto ls = next_line();
    if (!(ls >> theta(i))) throw std::runtime_error("checkpoint: malformed parameter");
  }
  return NetworkParams<double>(arch, theta);
}

// ---------------------------------------------------------------------------

#define NNPDE_INSTANTIATE_NET(S)                                                                   \
  template class NetworkParams<S>;                                                                 \
  template class JetEvaluator<S>;                                                                  \
  template NetworkParams<S> init_params<S>(const NetworkArch&, std::uint64_t);                     \
  template double forward<S>(const NetworkParams<S>&, const Eigen::Ref<const Eigen::VectorXd>&);   \
  template Eigen::VectorXd forward_batch<S>(const NetworkParams<S>&,                               \
                                            const Eigen::Ref<const Eigen::MatrixXd>&);             \
  template EvalResult eval_with_derivatives<S>(const NetworkParams<S>&,                            \
                                               const Eigen::Ref<const Eigen::VectorXd>&, bool, bool); \
  template std::pair<double, Eigen::VectorXd> param_gradient<S>(const NetworkParams<S>&,           \
                                                                const PointFunctional&);

NNPDE_INSTANTIATE_NET(double)
NNPDE_INSTANTIATE_NET(float)

}  // namespace nnpde
