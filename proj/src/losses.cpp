#include "nnpde/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace nnpde {

namespace {

void require_samples(const SampleSet& s, const char* what) {
  if (s.size() == 0) throw std::invalid_argument(std::string("empty ") + what + " sample set");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

Eigen::VectorXd eval_scalar(const std::function<double(ConstVecRef)>& fn, const Eigen::MatrixXd& x) {
  Eigen::VectorXd v(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) v(i) = fn(x.col(i));
  return v;
}

void collect_A(const PDEProblem& problem, const Eigen::MatrixXd& x, std::optional<Eigen::MatrixXd>& constant,
               std::vector<Eigen::MatrixXd>& per_point) {
  constant = problem.constant_A;
  if (constant) return;
  per_point.reserve(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) per_point.push_back(problem.A(x.col(i)));
}

// A g column-wise (d x B) for the points [s, s + B).
Eigen::MatrixXd apply_A(const std::optional<Eigen::MatrixXd>& constant, const std::vector<Eigen::MatrixXd>& per_point,
                        Eigen::Index s, const Eigen::MatrixXd& g, bool transpose = false) {
  if (constant) return transpose ? Eigen::MatrixXd(constant->transpose() * g) : Eigen::MatrixXd(*constant * g);
  Eigen::MatrixXd out(g.rows(), g.cols());
  for (Eigen::Index b = 0; b < g.cols(); ++b)
    if (transpose)
      out.col(b) = per_point[s + b].transpose() * g.col(b);
    else
      out.col(b) = per_point[s + b] * g.col(b);
  return out;
}

// Adds w * sum (u - g)^2 over the boundary points and, with `grad`, its parameter gradient.
double boundary_term(Model& u, const Eigen::MatrixXd& y, const Eigen::VectorXd& g, double w, double grad_scale,
                     Eigen::VectorXd* grad) {
  double sum = 0.0;
  FieldValues fv, adj;
  for (Eigen::Index s = 0; s < y.cols(); s += kChunk) {
    const Eigen::Index len = std::min(kChunk, y.cols() - s);
    u.eval(y.middleCols(s, len), Need{}, grad != nullptr, fv);
    const Eigen::VectorXd e = fv.value - g.segment(s, len);
    sum += e.squaredNorm();
    if (grad) {
      adj.value = 2.0 * w * grad_scale * e;
      u.backward(adj, *grad);
    }
  }
  return w * sum;
}

}  // namespace

BoundaryEnforcement BoundaryEnforcement::penalty(double alpha) {
  require_alpha(alpha);
  return {BoundaryMode::penalty, alpha, nullptr, nullptr};
}

BoundaryEnforcement BoundaryEnforcement::with_cutoff(std::shared_ptr<Model> w) {
  if (!w) throw std::invalid_argument("cutoff model is null");
  return {BoundaryMode::cutoff, 1.0, std::move(w), nullptr};
}

BoundaryEnforcement BoundaryEnforcement::with_lift(std::shared_ptr<Model> w, std::shared_ptr<Model> lift) {
  if (!w || !lift) throw std::invalid_argument("cutoff and lift models are required");
  return {BoundaryMode::lift, 1.0, std::move(w), std::move(lift)};
}

std::unique_ptr<Model> BoundaryEnforcement::apply(std::unique_ptr<Model> net) const {
  switch (mode) {
    case BoundaryMode::penalty: return net;
    case BoundaryMode::cutoff: return make_product_model(std::move(net), cutoff, nullptr);
    case BoundaryMode::lift: return make_product_model(std::move(net), cutoff, lift);
  }
  return net;
}

// ---------------------------------------------------------------------------

PinnLoss::PinnLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha)
    : x_(interior.points), y_(boundary.points), alpha_(alpha) {
  require_samples(interior, "interior");
  require_samples(boundary, "boundary");
  require_alpha(alpha);
  const Measures m = measures(problem.domain);
  wi_ = m.interior / static_cast<double>(x_.cols());
  wb_ = m.boundary / static_cast<double>(y_.cols());
  drift_.resize(x_.rows(), x_.cols());
  for (Eigen::Index i = 0; i < x_.cols(); ++i) drift_.col(i) = problem.beta(x_.col(i)) - problem.div_A(x_.col(i));
  c_ = eval_scalar(problem.c, x_);
  f_ = eval_scalar(problem.f, x_);
  g_ = eval_scalar(problem.g, y_);
}

LossValueGrad PinnLoss::operator()(Model& u, bool with_grad) const {
  LossValueGrad out;
  if (with_grad) out.grad = Eigen::VectorXd::Zero(u.parameter_count());
  Eigen::VectorXd* grad = with_grad ? &out.grad : nullptr;
  double sum = 0.0;
  FieldValues fv, adj;
  for (Eigen::Index s = 0; s < x_.cols(); s += kChunk) {
    const Eigen::Index len = std::min(kChunk, x_.cols() - s);
    u.eval(x_.middleCols(s, len), Need{true, true}, with_grad, fv);
    const auto drift = drift_.middleCols(s, len);
    const Eigen::VectorXd R = -fv.diffusion + (drift.array() * fv.grad.array()).colwise().sum().transpose().matrix() +
                              (c_.segment(s, len).array() * fv.value.array()).matrix() - f_.segment(s, len);
    sum += R.squaredNorm();
    if (with_grad) {
      const Eigen::VectorXd Rb = 2.0 * wi_ * R;
      adj.value = c_.segment(s, len).cwiseProduct(Rb);
      adj.grad = drift.array().rowwise() * Rb.transpose().array();
      adj.diffusion = -Rb;
      u.backward(adj, out.grad);
    }
  }
  out.interior = wi_ * sum;
  out.boundary = boundary_term(u, y_, g_, wb_, alpha_, grad);
  out.value = out.interior + alpha_ * out.boundary;
  return out;
}

// ---------------------------------------------------------------------------

DrmLoss::DrmLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha)
    : x_(interior.points), y_(boundary.points), alpha_(alpha) {
  if (!problem.beta_zero) throw std::invalid_argument("the energy loss needs beta = 0");
  require_samples(interior, "interior");
  require_samples(boundary, "boundary");
  require_alpha(alpha);
  const Measures m = measures(problem.domain);
  wi_ = m.interior / static_cast<double>(x_.cols());
  wb_ = m.boundary / static_cast<double>(y_.cols());
  collect_A(problem, x_, A_const_, A_);
  c_ = eval_scalar(problem.c, x_);
  f_ = eval_scalar(problem.f, x_);
  g_ = eval_scalar(problem.g, y_);
}

LossValueGrad DrmLoss::operator()(Model& u, bool with_grad) const {
  LossValueGrad out;
  if (with_grad) out.grad = Eigen::VectorXd::Zero(u.parameter_count());
  Eigen::VectorXd* grad = with_grad ? &out.grad : nullptr;
  double sum = 0.0;
  FieldValues fv, adj;
  for (Eigen::Index s = 0; s < x_.cols(); s += kChunk) {
    const Eigen::Index len = std::min(kChunk, x_.cols() - s);
    u.eval(x_.middleCols(s, len), Need{true, false}, with_grad, fv);
    const Eigen::MatrixXd AG = apply_A(A_const_, A_, s, fv.grad);
    const auto c = c_.segment(s, len).array();
    const auto f = f_.segment(s, len).array();
    const auto v = fv.value.array();
    sum += (fv.grad.array() * AG.array()).sum() + (c * v * v - f * v).sum();
    if (with_grad) {
      adj.value = wi_ * (2.0 * c * v - f).matrix();
      adj.grad = wi_ * (AG + apply_A(A_const_, A_, s, fv.grad, true));
      u.backward(adj, out.grad);
    }
  }
  out.interior = wi_ * sum;
  out.boundary = boundary_term(u, y_, g_, wb_, alpha_, grad);
  out.value = out.interior + alpha_ * out.boundary;
  return out;
}

// ---------------------------------------------------------------------------

WanLoss::WanLoss(const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary, double alpha)
    : x_(interior.points), y_(boundary.points), alpha_(alpha) {
  require_samples(interior, "interior");
  if (boundary.size() > 0) require_alpha(alpha);
  wi_ = measures(problem.domain).interior / static_cast<double>(x_.cols());
  collect_A(problem, x_, A_const_, A_);
  beta_.resize(x_.rows(), x_.cols());
  for (Eigen::Index i = 0; i < x_.cols(); ++i) beta_.col(i) = problem.beta(x_.col(i));
  c_ = eval_scalar(problem.c, x_);
  f_ = eval_scalar(problem.f, x_);
  g_ = eval_scalar(problem.g, y_);
}

WanValueGrad WanLoss::operator()(Model& u, Model& phi, bool grad_u, bool grad_phi) const {
  const Need vg{true, false};
  const FieldValues U = eval_all(u, x_, vg);
  const FieldValues P = eval_all(phi, x_, vg);
  const Eigen::MatrixXd AGphi = apply_A(A_const_, A_, 0, P.grad);
  const Eigen::VectorXd bGu = (beta_.array() * U.grad.array()).colwise().sum().transpose();
  const auto c = c_.array();
  const auto f = f_.array();
  // pairing integrand: grad u . A grad phi + phi (beta . grad u + c u - f)
  const Eigen::VectorXd src = (bGu.array() + c * U.value.array() - f).matrix();
  const double N = wi_ * ((U.grad.array() * AGphi.array()).sum() + src.dot(P.value));
  const double D = wi_ * (P.value.squaredNorm() + P.grad.squaredNorm());
  if (!(D >= 1e-14)) throw std::domain_error("test function norm is degenerate");

  WanValueGrad out;
  out.pairing = N;
  out.norm2 = D;
  out.interior = N * N / D;
  if (grad_u) out.grad_u = Eigen::VectorXd::Zero(u.parameter_count());
  if (grad_phi) out.grad_phi = Eigen::VectorXd::Zero(phi.parameter_count());
  const double s = 2.0 * N / D;
  const double t = N * N / (D * D);
  if (grad_u) {
    FieldValues adj;
    adj.value = (wi_ * s) * (c * P.value.array()).matrix();
    adj.grad = (wi_ * s) * (AGphi + (beta_.array().rowwise() * P.value.transpose().array()).matrix());
    backprop_all(u, x_, vg, adj, out.grad_u);
  }
  if (grad_phi) {
    FieldValues adj;
    adj.value = wi_ * (s * src - 2.0 * t * P.value);
    adj.grad = wi_ * (s * apply_A(A_const_, A_, 0, U.grad, true) - 2.0 * t * P.grad);
    backprop_all(phi, x_, vg, adj, out.grad_phi);
  }
  if (y_.cols() > 0)
    out.boundary = boundary_term(u, y_, g_, 1.0 / static_cast<double>(y_.cols()), alpha_, grad_u ? &out.grad_u : nullptr);
  out.value = out.interior + alpha_ * out.boundary;
  return out;
}

// ---------------------------------------------------------------------------

VpinnLoss::VpinnLoss(const ResidualAssembler& assembler, Eigen::VectorXd alpha)
    : assembler_(&assembler), alpha_(std::move(alpha)) {
  if (alpha_.size() != assembler.basis().size()) throw std::invalid_argument("one weight per basis function is needed");
  if ((alpha_.array() <= 0.0).any()) throw std::invalid_argument("residual weights must be positive");
}

LossValueGrad VpinnLoss::operator()(Model& u, bool with_grad) const {
  const Eigen::MatrixXd& x = assembler_->samples().points;
  const Need vg{true, false};
  const FieldValues U = eval_all(u, x, vg);
  const Eigen::VectorXd r = assembler_->residuals(U.value, U.grad);
  LossValueGrad out;
  out.interior = vpinn_loss(r, alpha_);
  out.value = out.interior;
  if (with_grad) {
    out.grad = Eigen::VectorXd::Zero(u.parameter_count());
    FieldValues adj;
    assembler_->adjoint(2.0 * alpha_.cwiseProduct(r), adj.value, adj.grad);
    backprop_all(u, x, vg, adj, out.grad);
  }
  return out;
}

// ---------------------------------------------------------------------------

LossValueGrad pinn_loss(Model& u, const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary,
                        double alpha, bool with_grad) {
  return PinnLoss(problem, interior, boundary, alpha)(u, with_grad);
}

LossValueGrad drm_loss(Model& u, const PDEProblem& problem, const SampleSet& interior, const SampleSet& boundary,
                       double alpha, bool with_grad) {
  return DrmLoss(problem, interior, boundary, alpha)(u, with_grad);
}

WanValueGrad wan_loss(Model& u, Model& phi, const PDEProblem& problem, const SampleSet& interior,
                      const SampleSet& boundary, double alpha) {
  return WanLoss(problem, interior, boundary, alpha)(u, phi, true, true);
}

PretrainResult pretrain_boundary_net(NetworkParams<double> init, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& target, const PretrainOptions& options) {
  if (!(options.stop_rel_error > 0.0)) throw std::invalid_argument("stop error must be positive");
  if (points.cols() != target.size() || points.cols() == 0)
    throw std::invalid_argument("pretraining needs one target per point");
  PretrainResult res{std::move(init), 0.0, 0, false};
  const int d = res.params.arch().input_dim();
  auto model = make_net_model(res.params, Precision::float64, DiffusionOperator::identity(d));
  Optimizer opt(options.optimizer, res.params.size());
  const double scale = target.squaredNorm() > 0.0 ? target.squaredNorm() : static_cast<double>(target.size());
  const double w = 2.0 / static_cast<double>(points.cols());
  Eigen::VectorXd grad(res.params.size());
  FieldValues fv, adj;
  for (;;) {
    const bool step = res.iterations < options.max_iterations;
    grad.setZero();
    double sum = 0.0;
    for (Eigen::Index s = 0; s < points.cols(); s += kChunk) {
      const Eigen::Index len = std::min(kChunk, points.cols() - s);
      model->eval(points.middleCols(s, len), Need{}, step, fv);
      const Eigen::VectorXd e = fv.value - target.segment(s, len);
      sum += e.squaredNorm();
      if (step) {
        adj.value = w * e;
        model->backward(adj, grad);
      }
    }
    res.rel_error = std::sqrt(sum / scale);
    if (!std::isfinite(res.rel_error)) throw NonFiniteError("pretraining diverged");
    res.converged = res.rel_error <= options.stop_rel_error;
    if (res.converged || !step) break;
    opt.step(res.params.theta(), grad, options.schedule.at(res.iterations));
    model->sync();
    ++res.iterations;
  }
  return res;
}

}  // namespace nnpde
