#include "nnpde/model.hpp"

#include <array>
#include <stdexcept>

namespace nnpde {

std::string to_string(Precision p) { return p == Precision::float32 ? "float32" : "float64"; }

Precision precision_from_string(const std::string& s) {
  if (s == "float32") return Precision::float32;
  if (s == "float64") return Precision::float64;
  throw std::invalid_argument("unknown precision '" + s + "'");
}

DiffusionOperator DiffusionOperator::from(const PDEProblem& problem) { return {problem.constant_A, problem.A}; }

DiffusionOperator DiffusionOperator::identity(int d) {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  return {I, [I](ConstVecRef) { return I; }};
}

namespace {

FieldValues slice(const FieldValues& v, Eigen::Index start, Eigen::Index len) {
  FieldValues s;
  if (v.value.size()) s.value = v.value.segment(start, len);
  if (v.grad.size()) s.grad = v.grad.middleCols(start, len);
  if (v.diffusion.size()) s.diffusion = v.diffusion.segment(start, len);
  return s;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
class NetModel final : public Model {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  NetModel(const NetworkParams<double>* master, NetworkParams<double> owned, DiffusionOperator diffusion)
      : master_(master), owned_(std::move(owned)), diffusion_(std::move(diffusion)) {
    frozen_ = master_ == nullptr;
    if (frozen_) master_ = &owned_;
    d_ = master_->arch().input_dim();
    work_ = master_->template cast<Scalar>();
    if (diffusion_.constant) {
      if (diffusion_.constant->rows() != d_) throw std::invalid_argument("diffusion matrix has the wrong size");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (*diffusion_.constant + diffusion_.constant->transpose()));
      basis_ = eig.eigenvectors();
      lambda_ = eig.eigenvalues();
    }
  }

  NetModel(const NetModel&) = delete;
  NetModel& operator=(const NetModel&) = delete;

  int dim() const override { return d_; }
  Eigen::Index parameter_count() const override { return frozen_ ? 0 : master_->size(); }

  void sync() override {
    if (master_->size() != work_.size()) throw std::logic_error("network size changed under the model");
    work_.theta() = master_->theta().template cast<Scalar>();
  }

  void eval(const Eigen::Ref<const Eigen::MatrixXd>& points, Need need, bool tape, FieldValues& out) override {
    kind_ = need.diffusion ? 2 : need.grad ? 1 : 0;
    JetEvaluator<Scalar>& jet = evaluator(kind_);
    auto o = jet.forward(points, tape);
    const Eigen::Index B = o.rows();
    out.value = o.col(0).template cast<double>();
    out.grad.resize(0, 0);
    out.diffusion.resize(0);
    if (kind_ == 0) return;
    const Eigen::MatrixXd D = o.middleCols(1, d_).template cast<double>();  // B x d
    if (kind_ == 1) {
      out.grad = D.transpose();
      return;
    }
    if (diffusion_.constant) {
      out.grad = basis_ * D.transpose();
      out.diffusion = o.middleCols(1 + d_, d_).template cast<double>() * lambda_;
      return;
    }
    out.grad = D.transpose();
    const auto& pairs = jet.layout().pairs;
    coef_.resize(static_cast<Eigen::Index>(pairs.size()), B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const Eigen::MatrixXd A = diffusion_.A(points.col(b));
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto [p, q] = pairs[j];
        coef_(j, b) = p == q ? A(p, p) : A(p, q) + A(q, p);
      }
    }
    out.diffusion = (coef_.array() * o.rightCols(pairs.size()).transpose().template cast<double>().array())
                        .colwise()
                        .sum()
                        .transpose();
  }

  void backward(const FieldValues& adjoint, Eigen::Ref<Eigen::VectorXd> grad) override {
    if (frozen_) return;
    JetEvaluator<Scalar>& jet = evaluator(kind_);
    const int C = jet.layout().channels();
    const Eigen::Index B = adjoint.value.size() ? adjoint.value.size()
                           : adjoint.grad.size() ? adjoint.grad.cols()
                                                 : adjoint.diffusion.size();
    Matrix adj = Matrix::Zero(B, C);
    if (adjoint.value.size()) adj.col(0) = adjoint.value.template cast<Scalar>();
    if (kind_ >= 1 && adjoint.grad.size()) {
      const Eigen::MatrixXd Dbar = (kind_ == 2 && diffusion_.constant) ? Eigen::MatrixXd(basis_.transpose() * adjoint.grad)
                                                                      : adjoint.grad;
      adj.middleCols(1, d_) = Dbar.transpose().template cast<Scalar>();
    }
    if (kind_ == 2 && adjoint.diffusion.size()) {
      if (diffusion_.constant) {
        adj.middleCols(1 + d_, d_) = (adjoint.diffusion * lambda_.transpose()).template cast<Scalar>();
      } else {
        const Eigen::Index q = coef_.rows();
        adj.rightCols(q) =
            (coef_.array().rowwise() * adjoint.diffusion.transpose().array()).transpose().matrix().template cast<Scalar>();
      }
    }
    if constexpr (std::is_same_v<Scalar, double>) {
      jet.backward(adj, grad);
    } else {
      Vector g = Vector::Zero(grad.size());
      jet.backward(adj, g);
      grad += g.template cast<double>();
    }
  }

 private:
  JetEvaluator<Scalar>& evaluator(int kind) {
    auto& slot = jets_[kind];
    if (!slot) {
      JetLayout layout = kind == 0   ? JetLayout::value_only(d_)
                         : kind == 1 ? JetLayout::gradient(d_)
                         : diffusion_.constant ? JetLayout::along_basis(basis_, true)
                                               : JetLayout::full_hessian(d_);
      if (kind == 2 && !diffusion_.constant && !diffusion_.A)
        throw std::invalid_argument("second derivatives requested without a diffusion operator");
      slot = std::make_unique<JetEvaluator<Scalar>>(work_, std::move(layout));
    }
    return *slot;
  }

  const NetworkParams<double>* master_;
  NetworkParams<double> owned_;
  bool frozen_ = false;
  DiffusionOperator diffusion_;
  int d_ = 0;
  NetworkParams<Scalar> work_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd lambda_;
  std::array<std::unique_ptr<JetEvaluator<Scalar>>, 3> jets_;
  int kind_ = 0;
  Eigen::MatrixXd coef_;
};

// ---------------------------------------------------------------------------

class FunctionModel final : public Model {
 public:
  FunctionModel(int d, PointEval f, DiffusionOperator diffusion)
      : d_(d), f_(std::move(f)), diffusion_(std::move(diffusion)) {}

  int dim() const override { return d_; }
  Eigen::Index parameter_count() const override { return 0; }

  void eval(const Eigen::Ref<const Eigen::MatrixXd>& points, Need need, bool, FieldValues& out) override {
    const Eigen::Index B = points.cols();
    out.value.resize(B);
    out.grad.resize(need.grad ? d_ : 0, need.grad ? B : 0);
    out.diffusion.resize(need.diffusion ? B : 0);
    for (Eigen::Index b = 0; b < B; ++b) {
      const EvalResult r = f_(points.col(b));
      out.value(b) = r.value;
      if (need.grad) {
        if (!r.grad) throw std::invalid_argument("function model has no gradient");
        out.grad.col(b) = *r.grad;
      }
      if (need.diffusion) {
        if (!r.hess) throw std::invalid_argument("function model has no Hessian");
        const Eigen::MatrixXd A = diffusion_.constant ? *diffusion_.constant : diffusion_.A(points.col(b));
        out.diffusion(b) = (A.array() * r.hess->array()).sum();
      }
    }
  }

  void backward(const FieldValues&, Eigen::Ref<Eigen::VectorXd>) override {}

 private:
  int d_;
  PointEval f_;
  DiffusionOperator diffusion_;
};

// ---------------------------------------------------------------------------

class ProductModel final : public Model {
 public:
  ProductModel(std::unique_ptr<Model> inner, std::shared_ptr<Model> cutoff, std::shared_ptr<Model> lift)
      : inner_(std::move(inner)), cutoff_(std::move(cutoff)), lift_(std::move(lift)) {}

  int dim() const override { return inner_->dim(); }
  Eigen::Index parameter_count() const override { return inner_->parameter_count(); }
  void sync() override { inner_->sync(); }

  void eval(const Eigen::Ref<const Eigen::MatrixXd>& points, Need need, bool tape, FieldValues& out) override {
    if (need.diffusion) throw std::invalid_argument("product models provide values and gradients only");
    const Need vg{need.grad, false};
    inner_->eval(points, vg, tape, out);
    has_grad_ = need.grad;
    if (cutoff_) {
      cutoff_->eval(points, vg, false, cut_);
      if (need.grad)
        out.grad = (out.grad.array().rowwise() * cut_.value.transpose().array() +
                    cut_.grad.array().rowwise() * out.value.transpose().array())
                       .matrix();
      out.value.array() *= cut_.value.array();
    }
    if (lift_) {
      FieldValues l;
      lift_->eval(points, vg, false, l);
      out.value += l.value;
      if (need.grad) out.grad += l.grad;
    }
  }

  void backward(const FieldValues& adjoint, Eigen::Ref<Eigen::VectorXd> grad) override {
    if (!cutoff_) {
      inner_->backward(adjoint, grad);
      return;
    }
    FieldValues a;
    a.value = adjoint.value.size() ? Eigen::VectorXd(adjoint.value.array() * cut_.value.array())
                                   : Eigen::VectorXd::Zero(cut_.value.size());
    if (has_grad_ && adjoint.grad.size()) {
      a.value += (cut_.grad.array() * adjoint.grad.array()).colwise().sum().transpose().matrix();
      a.grad = adjoint.grad.array().rowwise() * cut_.value.transpose().array();
    }
    inner_->backward(a, grad);
  }

 private:
  std::unique_ptr<Model> inner_;
  std::shared_ptr<Model> cutoff_, lift_;
  FieldValues cut_;
  bool has_grad_ = false;
};

}  // namespace

std::unique_ptr<Model> make_net_model(const NetworkParams<double>& params, Precision precision,
                                      DiffusionOperator diffusion) {
  if (precision == Precision::float32)
    return std::make_unique<NetModel<float>>(&params, NetworkParams<double>(), std::move(diffusion));
  return std::make_unique<NetModel<double>>(&params, NetworkParams<double>(), std::move(diffusion));
}

std::unique_ptr<Model> make_frozen_net_model(NetworkParams<double> params, DiffusionOperator diffusion) {
  return std::make_unique<NetModel<double>>(nullptr, std::move(params), std::move(diffusion));
}

std::unique_ptr<Model> make_function_model(int d, PointEval f, DiffusionOperator diffusion) {
  return std::make_unique<FunctionModel>(d, std::move(f), std::move(diffusion));
}

std::unique_ptr<Model> make_hypercube_cutoff(int d) {
  PointEval f = [d](ConstVecRef x) {
    Eigen::VectorXd q = (x.array() * (1.0 - x.array())).matrix();
    Eigen::VectorXd dq = (1.0 - 2.0 * x.array()).matrix();
    auto prod_except = [&](int a, int b) {
      double p = 1.0;
      for (int k = 0; k < d; ++k)
        if (k != a && k != b) p *= q(k);
      return p;
    };
    EvalResult r;
    r.value = prod_except(-1, -1);
    Eigen::VectorXd g(d);
    Eigen::MatrixXd h(d, d);
    for (int a = 0; a < d; ++a) {
      g(a) = dq(a) * prod_except(a, -1);
      for (int b = 0; b < d; ++b) h(a, b) = a == b ? -2.0 * prod_except(a, -1) : dq(a) * dq(b) * prod_except(a, b);
    }
    r.grad = g;
    r.hess = h;
    return r;
  };
  return make_function_model(d, std::move(f), DiffusionOperator::identity(d));
}

std::unique_ptr<Model> make_product_model(std::unique_ptr<Model> inner, std::shared_ptr<Model> cutoff,
                                          std::shared_ptr<Model> lift) {
  return std::make_unique<ProductModel>(std::move(inner), std::move(cutoff), std::move(lift));
}

FieldValues eval_all(Model& model, const Eigen::Ref<const Eigen::MatrixXd>& points, Need need) {
  const Eigen::Index N = points.cols();
  FieldValues all;
  all.value.resize(N);
  if (need.grad) all.grad.resize(model.dim(), N);
  if (need.diffusion) all.diffusion.resize(N);
  FieldValues chunk;
  for (Eigen::Index s = 0; s < N; s += kChunk) {
    const Eigen::Index len = std::min(kChunk, N - s);
    model.eval(points.middleCols(s, len), need, false, chunk);
    all.value.segment(s, len) = chunk.value;
    if (need.grad) all.grad.middleCols(s, len) = chunk.grad;
    if (need.diffusion) all.diffusion.segment(s, len) = chunk.diffusion;
  }
  return all;
}

void backprop_all(Model& model, const Eigen::Ref<const Eigen::MatrixXd>& points, Need need,
                  const FieldValues& adjoint, Eigen::Ref<Eigen::VectorXd> grad) {
  const Eigen::Index N = points.cols();
  FieldValues chunk;
  for (Eigen::Index s = 0; s < N; s += kChunk) {
    const Eigen::Index len = std::min(kChunk, N - s);
    model.eval(points.middleCols(s, len), need, true, chunk);
    model.backward(slice(adjoint, s, len), grad);
  }
}

}  // namespace nnpde
