#include "nnpde/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nnpde/mesh.hpp"
#include "nnpde/rng.hpp"

namespace nnpde {

std::string to_string(Method m) {
  switch (m) {
    case Method::pinn: return "pinn";
    case Method::drm: return "drm";
    case Method::vpinn: return "vpinn";
    case Method::wan: return "wan";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "pinn") return Method::pinn;
  if (s == "drm") return Method::drm;
  if (s == "vpinn") return Method::vpinn;
  if (s == "wan") return Method::wan;
  throw std::invalid_argument("unknown method '" + s + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  arch.validate();
  const PDEProblem p = builtin(problem);
  if (arch.input_dim() != p.dim()) fail("network input width does not match the problem dimension");
  if (n < 1) fail("n must be positive");
  if (method != Method::vpinn && m < 1) fail("m must be positive");
  if (method != Method::vpinn && !(alpha > 0.0)) fail("alpha must be positive");
  if (iterations < 0) fail("iterations must be nonnegative");
  if (val_every < 1) fail("validation cadence must be positive");
  if (val_size < 1) fail("validation size must be positive");
  if (!(lr.base_lr > 0.0)) fail("learning rate must be positive");
  if (stop.kind == EarlyStop::Kind::patience && stop.patience < 1) fail("patience must be positive");
  if (wan.has_value() != (method == Method::wan)) fail("wan settings are required exactly for method wan");
  if (vpinn.has_value() != (method == Method::vpinn)) fail("vpinn settings are required exactly for method vpinn");
  if (method == Method::drm && !p.beta_zero) fail("drm needs a problem without drift");
  if (wan) {
    wan->phi_arch.validate();
    if (wan->phi_arch.input_dim() != p.dim()) fail("test network input width does not match the problem dimension");
    if (wan->u_steps < 1 || wan->phi_steps < 1) fail("wan inner step counts must be positive");
    if (!(wan->phi_lr.base_lr > 0.0)) fail("test learning rate must be positive");
    if (p.domain.kind != DomainKind::unit_hypercube) fail("wan needs a hypercube domain for its analytic cutoff");
  }
  if (vpinn) {
    if (p.dim() != 2) fail("vpinn needs a 2-D problem");
    vpinn->aux_arch.validate();
    if (vpinn->aux_arch.input_dim() != 2) fail("auxiliary network input width must be 2");
    if (vpinn->mc_per_triangle < 1) fail("mc points per triangle must be positive");
    if (vpinn->mesh_nodes < 5) fail("mesh needs at least 5 nodes");
    if (vpinn->aux_points < 1) fail("auxiliary fitting points must be positive");
  }
}

// ---------------------------------------------------------------------------

const TrainRow& TrainRecord::best() const {
  if (rows.empty()) throw std::logic_error("empty training record");
  const TrainRow* b = &rows.front();
  for (const TrainRow& r : rows)
    if (r.val_rel_l2 < b->val_rel_l2) b = &r;
  return *b;
}

void write_csv_row(std::ostream& os, const TrainRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.6f\n", r.iter, r.loss, r.loss_interior,
                r.loss_boundary, r.val_rel_l2, r.seconds);
  os << buf;
}

void TrainRecord::write_csv(std::ostream& os) const {
  os << kRecordHeader << '\n';
  for (const TrainRow& r : rows) write_csv_row(os, r);
}

TrainRecord TrainRecord::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRecordHeader)
    throw std::runtime_error("not a training record");
  TrainRecord rec;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TrainRow r;
    char c1, c2, c3, c4, c5;
    if (!(ss >> r.iter >> c1 >> r.loss >> c2 >> r.loss_interior >> c3 >> r.loss_boundary >> c4 >> r.val_rel_l2 >> c5 >>
          r.seconds))
      throw std::runtime_error("malformed record row: " + line);
    rec.rows.push_back(r);
  }
  return rec;
}

StopDecision early_stop_rule(const TrainRecord& record, const EarlyStop& rule) {
  if (record.rows.empty()) return StopDecision::go;
  switch (rule.kind) {
    case EarlyStop::Kind::none: return StopDecision::go;
    case EarlyStop::Kind::fixed: return record.rows.back().iter >= rule.at ? StopDecision::stop : StopDecision::go;
    case EarlyStop::Kind::patience: {
      double best = record.rows.front().val_rel_l2;
      long since = 0;
      for (std::size_t i = 1; i < record.rows.size(); ++i) {
        if (record.rows[i].val_rel_l2 < best - rule.min_delta) {
          best = record.rows[i].val_rel_l2;
          since = 0;
        } else {
          ++since;
        }
      }
      return since >= rule.patience ? StopDecision::stop : StopDecision::go;
    }
  }
  return StopDecision::go;
}

// ---------------------------------------------------------------------------

double l_shape_cutoff_target(double x, double y) {
  double rho;
  if (y >= 0.0)
    rho = x >= 0.0 ? y : std::hypot(x, y);
  else
    rho = -x;
  return (1 - x * x) * (1 - y * y) * rho;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Recorder {
  const TrainConfig& cfg;
  const TrainSinks& sinks;
  const ValidationSet& validation;
  TrainRecord& record;
  Clock::time_point start = Clock::now();

  StopDecision log(long iter, double loss, double interior, double boundary, Model& u) {
    TrainRow r{iter, loss, interior, boundary, l2_relative_error(u, validation), 0.0};
    if (cfg.wall_time) r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    record.rows.push_back(r);
    if (sinks.on_row) sinks.on_row(r);
    return early_stop_rule(record, cfg.stop);
  }

  void note(const std::string& s) const {
    if (sinks.on_note) sinks.on_note(s);
  }
};

void require_finite(double v, long iter) {
  if (!std::isfinite(v)) throw NonFiniteError("non-finite loss at iteration " + std::to_string(iter));
}

// Plain descent on one loss. loss(k, with_grad) evaluates at the current parameters.
template <typename LossFn>
void descend(const TrainConfig& cfg, Model& u, NetworkParams<double>& params, LossFn&& loss, Recorder& rec,
             TrainResult& res, Eigen::VectorXd& last_good) {
  Optimizer opt(cfg.optimizer, params.size());
  for (long k = 0;; ++k) {
    const bool last = k == cfg.iterations;
    const LossValueGrad L = loss(k, !last);
    require_finite(L.value, k);
    last_good = params.theta();
    if (last || k % cfg.val_every == 0) {
      if (rec.log(k, L.value, L.interior, L.boundary, u) == StopDecision::stop) break;
    }
    if (last) break;
    opt.step(params.theta(), L.grad, cfg.lr.at(k));
    u.sync();
    res.iterations_run = k + 1;
  }
}

std::shared_ptr<Model> fit_aux(const NetworkArch& arch, const Eigen::MatrixXd& pts, const Eigen::VectorXd& target,
                               const PretrainOptions& opt, std::uint64_t seed, const char* what, Recorder& rec) {
  const PretrainResult r = pretrain_boundary_net(init_params<double>(arch, seed), pts, target, opt);
  std::ostringstream s;
  s << what << " network: " << r.iterations << " iterations, relative error " << r.rel_error
    << (r.converged ? "" : " (iteration cap reached)");
  rec.note(s.str());
  return make_frozen_net_model(r.params, DiffusionOperator::identity(2));
}

BoundaryEnforcement vpinn_enforcement(const TrainConfig& cfg, const PDEProblem& problem, Recorder& rec) {
  const VpinnSettings& vs = *cfg.vpinn;
  const SampleSet bd = sample_boundary(problem.domain, vs.aux_points, derive_seed(cfg.seed, streams::lift));
  Eigen::VectorXd g(bd.size());
  for (Eigen::Index j = 0; j < bd.size(); ++j) g(j) = problem.g(bd.points.col(j));
  auto lift = fit_aux(vs.aux_arch, bd.points, g, vs.pretrain, derive_seed(cfg.seed, streams::lift, 1), "lift", rec);

  std::shared_ptr<Model> cutoff;
  if (problem.domain.kind == DomainKind::unit_hypercube) {
    cutoff = make_hypercube_cutoff(2);
  } else {
    const SampleSet in = sample_interior(problem.domain, vs.aux_points, derive_seed(cfg.seed, streams::cutoff));
    const SampleSet on = sample_boundary(problem.domain, vs.aux_points / 2, derive_seed(cfg.seed, streams::cutoff, 1));
    Eigen::MatrixXd pts(2, in.size() + on.size());
    pts << in.points, on.points;
    Eigen::VectorXd t(pts.cols());
    for (Eigen::Index j = 0; j < pts.cols(); ++j) t(j) = l_shape_cutoff_target(pts(0, j), pts(1, j));
    cutoff = fit_aux(vs.aux_arch, pts, t, vs.pretrain, derive_seed(cfg.seed, streams::cutoff, 2), "cutoff", rec);
  }
  return BoundaryEnforcement::with_lift(cutoff, lift);
}

void train_wan(const TrainConfig& cfg, const PDEProblem& problem, Model& u, NetworkParams<double>& params,
               Recorder& rec, TrainResult& res, Eigen::VectorXd& last_good) {
  const WanSettings& ws = *cfg.wan;
  res.phi_params = init_params<double>(ws.phi_arch, derive_seed(cfg.seed, streams::test_init));
  NetworkParams<double>& phi_params = *res.phi_params;
  auto phi = make_product_model(make_net_model(phi_params, cfg.precision, DiffusionOperator::from(problem)),
                                make_hypercube_cutoff(problem.dim()), nullptr);
  Optimizer opt_u(cfg.optimizer, params.size());
  Optimizer opt_phi(ws.phi_optimizer, phi_params.size());

  for (long k = 0;; ++k) {
    const bool last = k == cfg.iterations;
    const SampleSet in = sample_interior(problem.domain, cfg.n, derive_seed(cfg.seed, streams::interior, k));
    const SampleSet bd = sample_boundary(problem.domain, cfg.m, derive_seed(cfg.seed, streams::boundary, k));
    const WanLoss loss(problem, in, bd, cfg.alpha);
    bool first = true;
    bool stop = false;
    // One evaluation; the first one of an outer iteration is the logged state.
    auto evaluate = [&](bool gu, bool gp) {
      WanValueGrad L = loss(u, *phi, gu, gp);
      require_finite(L.value, k);
      if (first) {
        first = false;
        last_good = params.theta();
        if (last || k % cfg.val_every == 0)
          stop = rec.log(k, L.value, L.interior, L.boundary, u) == StopDecision::stop;
      }
      return L;
    };
    auto ascend = [&] {
      for (int j = 0; j < ws.phi_steps && !stop; ++j) {
        const WanValueGrad L = evaluate(false, true);
        if (stop) return;
        opt_phi.step(phi_params.theta(), -L.grad_phi, ws.phi_lr.at(k));
        phi->sync();
      }
    };
    auto descend_u = [&] {
      for (int j = 0; j < ws.u_steps && !stop; ++j) {
        const WanValueGrad L = evaluate(true, false);
        if (stop) return;
        opt_u.step(params.theta(), L.grad_u, cfg.lr.at(k));
        u.sync();
      }
    };
    if (last) {
      evaluate(false, false);
      break;
    }
    if (ws.phi_first) {
      ascend();
      descend_u();
    } else {
      descend_u();
      ascend();
    }
    if (stop) break;
    res.iterations_run = k + 1;
  }
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const PDEProblem& problem, const TrainSinks& sinks) {
  cfg.validate();
  if (problem.dim() != cfg.arch.input_dim()) throw std::invalid_argument("problem dimension does not match network");
  TrainResult res;
  res.params = init_params<double>(cfg.arch, derive_seed(cfg.seed, streams::init));
  const ValidationSet validation = ValidationSet::make(problem, cfg.val_size, cfg.val_seed);
  Recorder rec{cfg, sinks, validation, res.record};
  Eigen::VectorXd last_good = res.params.theta();

  BoundaryEnforcement enforcement = BoundaryEnforcement::penalty(cfg.method == Method::vpinn ? 1.0 : cfg.alpha);
  std::unique_ptr<P1Basis> basis;
  if (cfg.method == Method::vpinn) {
    enforcement = vpinn_enforcement(cfg, problem, rec);
    basis = std::make_unique<P1Basis>(build_mesh(problem.domain, cfg.vpinn->mesh_nodes));
    std::ostringstream s;
    s << "mesh: " << basis->mesh().node_count() << " nodes, " << basis->mesh().triangle_count() << " triangles, "
      << basis->size() << " test functions";
    rec.note(s.str());
  }
  auto u = enforcement.apply(make_net_model(res.params, cfg.precision, DiffusionOperator::from(problem)));

  try {
    switch (cfg.method) {
      case Method::pinn: {
        const PinnLoss loss(problem, sample_interior(problem.domain, cfg.n, derive_seed(cfg.seed, streams::interior)),
                            sample_boundary(problem.domain, cfg.m, derive_seed(cfg.seed, streams::boundary)), cfg.alpha);
        descend(cfg, *u, res.params, [&](long, bool g) { return loss(*u, g); }, rec, res, last_good);
        break;
      }
      case Method::drm: {
        const DrmLoss loss(problem, sample_interior(problem.domain, cfg.n, derive_seed(cfg.seed, streams::interior)),
                           sample_boundary(problem.domain, cfg.m, derive_seed(cfg.seed, streams::boundary)), cfg.alpha);
        descend(cfg, *u, res.params, [&](long, bool g) { return loss(*u, g); }, rec, res, last_good);
        break;
      }
      case Method::vpinn: {
        const Eigen::VectorXd weights = Eigen::VectorXd::Ones(basis->size());
        auto loss = [&](long k, bool g) {
          const ResidualAssembler assembler(
              *basis, problem,
              sample_triangles(basis->mesh(), cfg.vpinn->mc_per_triangle, derive_seed(cfg.seed, streams::mesh_mc, k)));
          return VpinnLoss(assembler, weights)(*u, g);
        };
        descend(cfg, *u, res.params, loss, rec, res, last_good);
        break;
      }
      case Method::wan:
        train_wan(cfg, problem, *u, res.params, rec, res, last_good);
        break;
    }
  } catch (const NonFiniteError& e) {
    res.aborted = true;
    res.abort_reason = e.what();
    res.params.theta() = last_good;
  }
  res.solution = enforcement.apply(make_frozen_net_model(res.params, DiffusionOperator::from(problem)));
  return res;
}

}  // namespace nnpde
