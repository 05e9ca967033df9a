#include "nnpde/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nnpde/rng.hpp"

namespace nnpde {

ValidationSet ValidationSet::make(const PDEProblem& problem, Eigen::Index size, std::uint64_t seed) {
  if (!problem.has_exact()) throw std::invalid_argument("problem " + problem.id + " has no reference solution");
  ValidationSet v;
  v.samples = sample_interior(problem.domain, size, derive_seed(seed, streams::validation));
  v.exact.resize(size);
  for (Eigen::Index i = 0; i < size; ++i) v.exact(i) = problem.exact(v.samples.points.col(i)).value;
  return v;
}

double l2_relative_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  if (approx.size() != exact.size()) throw std::invalid_argument("value vectors differ in length");
  const double den = exact.squaredNorm();
  if (!(den > 0.0)) throw std::domain_error("reference values vanish");
  return std::sqrt((approx - exact).squaredNorm() / den);
}

double l2_relative_error(Model& u, const ValidationSet& validation) {
  return l2_relative_error(eval_all(u, validation.samples.points, Need{}).value, validation.exact);
}

GridSpec GridSpec::for_domain(const Domain& domain, int resolution) {
  GridSpec s;
  s.nx = s.ny = resolution;
  s.x_lo = s.y_lo = domain.box_lo();
  s.x_hi = s.y_hi = domain.box_hi();
  s.slice = Eigen::VectorXd::Constant(domain.dim, 0.5 * (domain.box_lo() + domain.box_hi()));
  return s;
}

bool grid_member(const Domain& domain, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double lo = domain.box_lo(), hi = domain.box_hi();
  if ((x.array() < lo).any() || (x.array() > hi).any()) return false;
  if (domain.kind == DomainKind::l_shape) return !(x(0) >= 0.0 && x(1) <= 0.0);
  return true;
}

namespace {

template <typename Eval>
FieldGrid make_grid(const Domain& domain, const GridSpec& spec, Eval&& eval) {
  if (spec.nx < 2 || spec.ny < 2) throw std::invalid_argument("grid needs at least two points per axis");
  if (spec.slice.size() != domain.dim) throw std::invalid_argument("slice point has the wrong dimension");
  FieldGrid g;
  g.xs = Eigen::VectorXd::LinSpaced(spec.nx, spec.x_lo, spec.x_hi);
  g.ys = Eigen::VectorXd::LinSpaced(spec.ny, spec.y_lo, spec.y_hi);
  Eigen::MatrixXd pts(domain.dim, Eigen::Index(spec.nx) * spec.ny);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      auto p = pts.col(Eigen::Index(j) * spec.nx + i);
      p = spec.slice;
      p(0) = g.xs(i);
      p(1) = g.ys(j);
    }
  const Eigen::VectorXd v = eval(pts);
  g.values.resize(spec.ny, spec.nx);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const Eigen::Index k = Eigen::Index(j) * spec.nx + i;
      g.values(j, i) = grid_member(domain, pts.col(k)) ? v(k) : std::numeric_limits<double>::quiet_NaN();
    }
  return g;
}

}  // namespace

FieldGrid field_grid(Model& u, const Domain& domain, const GridSpec& spec) {
  return make_grid(domain, spec, [&](const Eigen::MatrixXd& pts) { return eval_all(u, pts, Need{}).value; });
}

FieldGrid field_grid(const PointEval& u, const Domain& domain, const GridSpec& spec) {
  return make_grid(domain, spec, [&](const Eigen::MatrixXd& pts) {
    Eigen::VectorXd v(pts.cols());
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
      v(k) = grid_member(domain, pts.col(k)) ? u(pts.col(k)).value : 0.0;
    return v;
  });
}

FieldGrid abs_error(const FieldGrid& a, const FieldGrid& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw std::invalid_argument("grids differ in shape");
  FieldGrid e{a.xs, a.ys, (a.values - b.values).cwiseAbs()};
  return e;
}

void write_csv(std::ostream& os, const FieldGrid& grid) {
  const auto old = os.precision(12);
  for (Eigen::Index i = 0; i < grid.xs.size(); ++i) os << ',' << grid.xs(i);
  os << '\n';
  for (Eigen::Index j = 0; j < grid.ys.size(); ++j) {
    os << grid.ys(j);
    for (Eigen::Index i = 0; i < grid.xs.size(); ++i) {
      os << ',';
      if (!std::isnan(grid.values(j, i))) os << grid.values(j, i);
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace nnpde
