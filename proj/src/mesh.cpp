#include "nnpde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nnpde/rng.hpp"

namespace nnpde {

double TriMesh::signed_area(int t) const {
  const auto& [i, j, k] = triangles[t];
  const Eigen::Vector2d a = nodes[j] - nodes[i], b = nodes[k] - nodes[i];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < triangle_count(); ++t) s += signed_area(t);
  return s;
}

void TriMesh::validate() const {
  const int n = node_count();
  if (static_cast<int>(node_is_boundary.size()) != n) throw std::runtime_error("mesh: boundary flags do not match nodes");
  std::map<std::pair<int, int>, int> edges;
  for (int t = 0; t < triangle_count(); ++t) {
    for (int v : triangles[t])
      if (v < 0 || v >= n) throw std::runtime_error("mesh: triangle " + std::to_string(t) + " has a bad node index");
    if (!(signed_area(t) > 0.0))
      throw std::runtime_error("mesh: triangle " + std::to_string(t) + " is not counterclockwise with positive area");
    for (int k = 0; k < 3; ++k) {
      int a = triangles[t][k], b = triangles[t][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      if (++edges[{a, b}] > 2) throw std::runtime_error("mesh: edge shared by more than two triangles");
    }
  }
  for (const auto& [e, count] : edges)
    if (count == 1 && (!node_is_boundary[e.first] || !node_is_boundary[e.second]))
      throw std::runtime_error("mesh: unshared edge between non-boundary nodes");
}

TriMesh criss_cross_mesh(const Domain& domain, int cells) {
  if (domain.dim != 2) throw std::invalid_argument("meshes are two-dimensional only");
  if (cells < 1) throw std::invalid_argument("mesh needs at least one cell");
  if (domain.kind == DomainKind::l_shape && cells % 2 != 0)
    throw std::invalid_argument("L-shape mesh needs an even cell count");
  const double lo = domain.box_lo(), hi = domain.box_hi();
  const double h = (hi - lo) / cells;
  TriMesh mesh;
  std::vector<int> vertex_id((cells + 1) * (cells + 1), -1);
  auto vertex = [&](int i, int j) {
    int& id = vertex_id[j * (cells + 1) + i];
    if (id < 0) {
      id = mesh.node_count();
      mesh.nodes.emplace_back(lo + i * h, lo + j * h);
    }
    return id;
  };
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i) {
      const Eigen::Vector2d centre(lo + (i + 0.5) * h, lo + (j + 0.5) * h);
      if (!domain.contains(centre)) continue;
      const int v00 = vertex(i, j), v10 = vertex(i + 1, j), v11 = vertex(i + 1, j + 1), v01 = vertex(i, j + 1);
      const int c = mesh.node_count();
      mesh.nodes.push_back(centre);
      mesh.triangles.push_back({v00, v10, c});
      mesh.triangles.push_back({v10, v11, c});
      mesh.triangles.push_back({v11, v01, c});
      mesh.triangles.push_back({v01, v00, c});
    }
  mesh.node_is_boundary.resize(mesh.nodes.size());
  for (int v = 0; v < mesh.node_count(); ++v) mesh.node_is_boundary[v] = domain.on_boundary(mesh.nodes[v], 1e-12);
  return mesh;
}

namespace {

long long criss_cross_nodes(const Domain& domain, long long cells) {
  if (domain.kind == DomainKind::unit_hypercube) return (cells + 1) * (cells + 1) + cells * cells;
  const long long k = cells / 2;
  return (cells + 1) * (cells + 1) - k * k + 3 * k * k;
}

}  // namespace

TriMesh build_mesh(const Domain& domain, int target_nodes) {
  if (domain.dim != 2) throw std::invalid_argument("meshes are two-dimensional only");
  if (target_nodes < 1) throw std::invalid_argument("target node count must be >= 1");
  const int step = domain.kind == DomainKind::l_shape ? 2 : 1;
  int best = step;
  long long best_gap = std::numeric_limits<long long>::max();
  for (int cells = step; criss_cross_nodes(domain, cells - step) <= 2LL * target_nodes + 10; cells += step) {
    const long long gap = std::llabs(criss_cross_nodes(domain, cells) - target_nodes);
    if (gap < best_gap) {
      best_gap = gap;
      best = cells;
    }
  }
  return criss_cross_mesh(domain, best);
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << "nodes " << mesh.node_count() << '\n' << std::setprecision(17);
  for (int v = 0; v < mesh.node_count(); ++v)
    os << mesh.nodes[v].x() << ' ' << mesh.nodes[v].y() << ' ' << int(mesh.node_is_boundary[v]) << '\n';
  os << "triangles " << mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

TriMesh read_mesh(std::istream& is) {
  auto header = [&](const std::string& want) {
    std::string tag;
    long long count = -1;
    if (!(is >> tag >> count) || tag != want || count < 0) throw std::runtime_error("mesh: expected '" + want + " N'");
    return static_cast<int>(count);
  };
  TriMesh mesh;
  const int n = header("nodes");
  mesh.nodes.resize(n);
  mesh.node_is_boundary.resize(n);
  for (int v = 0; v < n; ++v) {
    int b = -1;
    if (!(is >> mesh.nodes[v].x() >> mesh.nodes[v].y() >> b) || (b != 0 && b != 1))
      throw std::runtime_error("mesh: malformed node line " + std::to_string(v));
    mesh.node_is_boundary[v] = static_cast<char>(b);
  }
  const int m = header("triangles");
  mesh.triangles.resize(m);
  for (int t = 0; t < m; ++t)
    if (!(is >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2]))
      throw std::runtime_error("mesh: malformed triangle line " + std::to_string(t));
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------------------
// P1Basis

P1Basis::P1Basis(TriMesh mesh) : mesh_(std::move(mesh)) {
  mesh_.validate();
  const int n = mesh_.node_count();
  basis_of_node_.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (!mesh_.node_is_boundary[v]) {
      basis_of_node_[v] = static_cast<int>(interior_.size());
      interior_.push_back(v);
    }

  const int nt = mesh_.triangle_count();
  bary_grad_.resize(nt);
  star_.assign(n, {});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_.triangles[t];
    const double twice_area = 2.0 * mesh_.signed_area(t);
    for (int k = 0; k < 3; ++k) {
      // grad lambda_k = perp(x_{k+2} - x_{k+1}) / (2|T|), pointing into the triangle.
      const Eigen::Vector2d e = mesh_.nodes[tri[(k + 2) % 3]] - mesh_.nodes[tri[(k + 1) % 3]];
      bary_grad_[t].row(k) = Eigen::RowVector2d(-e.y(), e.x()) / twice_area;
      star_[tri[k]].push_back(t);
    }
  }

  neighbour_.assign(nt, {-1, -1, -1});
  std::map<std::pair<int, int>, std::pair<int, int>> open;  // edge -> (triangle, local vertex opposite)
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = mesh_.triangles[t][(k + 1) % 3], b = mesh_.triangles[t][(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto it = open.find({a, b});
      if (it == open.end()) {
        open[{a, b}] = {t, k};
      } else {
        neighbour_[t][k] = it->second.first;
        neighbour_[it->second.first][it->second.second] = t;
        open.erase(it);
      }
    }
}

Eigen::Vector3d P1Basis::barycentric(int t, const Eigen::Vector2d& x) const {
  const Eigen::Vector2d& x0 = mesh_.nodes[mesh_.triangles[t][0]];
  Eigen::Vector3d l;
  l(1) = bary_grad_[t].row(1).dot(x - x0);
  l(2) = bary_grad_[t].row(2).dot(x - x0);
  l(0) = 1.0 - l(1) - l(2);
  return l;
}

int P1Basis::locate(const Eigen::Vector2d& x, int hint) const {
  constexpr double tol = 1e-12;
  const int nt = mesh_.triangle_count();
  if (nt == 0) return -1;
  int t = (hint >= 0 && hint < nt) ? hint : 0;
  for (int steps = 0; steps < nt; ++steps) {
    const Eigen::Vector3d l = barycentric(t, x);
    Eigen::Index worst;
    if (l.minCoeff(&worst) >= -tol) return t;
    const int next = neighbour_[t][worst];
    if (next < 0) break;
    t = next;
  }
  for (t = 0; t < nt; ++t)
    if (barycentric(t, x).minCoeff() >= -tol) return t;
  return -1;
}

std::pair<double, Eigen::Vector2d> P1Basis::eval(int i, const Eigen::Vector2d& x, int* hint) const {
  if (i < 0 || i >= size()) throw std::out_of_range("basis index out of range");
  const int t = locate(x, hint ? *hint : 0);
  if (t < 0) throw std::domain_error("point is not inside the mesh");
  if (hint) *hint = t;
  const int node = interior_[i];
  const auto& tri = mesh_.triangles[t];
  for (int k = 0; k < 3; ++k)
    if (tri[k] == node) return {std::clamp(barycentric(t, x)(k), 0.0, 1.0), bary_grad_[t].row(k).transpose()};
  return {0.0, Eigen::Vector2d::Zero()};
}

double P1Basis::partition_of_unity(const Eigen::Vector2d& x) const {
  const int t = locate(x);
  if (t < 0) throw std::domain_error("point is not inside the mesh");
  return barycentric(t, x).sum();
}

double P1Basis::star_area(int i) const {
  double s = 0.0;
  for (int t : star_[interior_[i]]) s += mesh_.signed_area(t);
  return s;
}

// ---------------------------------------------------------------------------
// Sampling and assembly

TriangleSamples sample_triangles(const TriMesh& mesh, int per_triangle, std::uint64_t seed) {
  if (per_triangle < 1) throw std::invalid_argument("need at least one point per triangle");
  Rng rng(seed, streams::mesh_mc);
  const Eigen::Index N = static_cast<Eigen::Index>(mesh.triangle_count()) * per_triangle;
  TriangleSamples s;
  s.per_triangle = per_triangle;
  s.points.resize(2, N);
  s.bary.resize(3, N);
  s.weight.resize(N);
  s.triangle.resize(N);
  Eigen::Index p = 0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double w = mesh.signed_area(t) / per_triangle;
    for (int k = 0; k < per_triangle; ++k, ++p) {
      Eigen::Vector3d l;
      Eigen::Vector2d x;
      do {
        const double r = std::sqrt(rng.uniform()), q = rng.uniform();
        l << 1.0 - r, r * (1.0 - q), r * q;
        x = l(0) * mesh.nodes[tri[0]] + l(1) * mesh.nodes[tri[1]] + l(2) * mesh.nodes[tri[2]];
      } while (x.squaredNorm() < 1e-16);  // keeps singular sources at the origin finite
      s.points.col(p) = x;
      s.bary.col(p) = l;
      s.weight(p) = w;
      s.triangle[p] = t;
    }
  }
  return s;
}

ResidualAssembler::ResidualAssembler(const P1Basis& basis, const PDEProblem& problem, TriangleSamples samples)
    : basis_(&basis), samples_(std::move(samples)) {
  if (problem.dim() != 2) throw std::invalid_argument("residual assembly needs a 2-D problem");
  const Eigen::Index N = samples_.size();
  A_.resize(N);
  beta_.resize(2, N);
  c_.resize(N);
  f_.resize(N);
  for (Eigen::Index p = 0; p < N; ++p) {
    const Eigen::Vector2d x = samples_.points.col(p);
    A_[p] = problem.constant_A ? Eigen::Matrix2d(*problem.constant_A) : Eigen::Matrix2d(problem.A(x));
    beta_.col(p) = problem.beta(x);
    c_(p) = problem.c(x);
    f_(p) = problem.f(x);
  }
}

// visit(p, basis index, contribution of the point to that residual)
template <typename Visit>
void ResidualAssembler::for_each_term(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad, Visit&& visit) const {
  const Eigen::Index N = samples_.size();
  if (value.size() != N || grad.cols() != N || grad.rows() != 2)
    throw std::invalid_argument("trial values do not match the sample set");
  const TriMesh& mesh = basis_->mesh();
  for (Eigen::Index p = 0; p < N; ++p) {
    const int t = samples_.triangle[p];
    const Eigen::Vector2d flux = A_[p] * grad.col(p);
    const double rest = beta_.col(p).dot(grad.col(p)) + c_(p) * value(p) - f_(p);
    const auto& G = basis_->bary_gradients(t);
    for (int k = 0; k < 3; ++k) {
      const int i = basis_->basis_index(mesh.triangles[t][k]);
      if (i < 0) continue;
      visit(p, i, G.row(k).dot(flux) + rest * samples_.bary(k, p));
    }
  }
}

Eigen::VectorXd ResidualAssembler::residuals(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(basis_->size());
  for_each_term(value, grad, [&](Eigen::Index p, int i, double h) { r(i) += samples_.weight(p) * h; });
  return r;
}

Eigen::VectorXd ResidualAssembler::standard_errors(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad) const {
  // Per (triangle, basis) pair: sample variance of the K integrand values,
  // variance of the triangle estimate = |T|^2 s^2 / K.
  const int K = samples_.per_triangle;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(basis_->size());
  if (K < 2) return var.setConstant(std::numeric_limits<double>::quiet_NaN());
  const TriMesh& mesh = basis_->mesh();
  std::vector<std::array<double, 3>> sum(mesh.triangle_count(), {0, 0, 0}), sq(mesh.triangle_count(), {0, 0, 0});
  for_each_term(value, grad, [&](Eigen::Index p, int i, double h) {
    const int t = samples_.triangle[p];
    for (int k = 0; k < 3; ++k)
      if (basis_->basis_index(mesh.triangles[t][k]) == i) {
        sum[t][k] += h;
        sq[t][k] += h * h;
      }
  });
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.signed_area(t);
    for (int k = 0; k < 3; ++k) {
      const int i = basis_->basis_index(mesh.triangles[t][k]);
      if (i < 0) continue;
      const double mean = sum[t][k] / K;
      const double s2 = std::max(0.0, (sq[t][k] - K * mean * mean) / (K - 1));
      var(i) += area * area * s2 / K;
    }
  }
  return var.cwiseSqrt();
}

void ResidualAssembler::adjoint(const Eigen::VectorXd& rbar, Eigen::VectorXd& value_bar,
                                Eigen::MatrixXd& grad_bar) const {
  if (rbar.size() != basis_->size()) throw std::invalid_argument("adjoint size does not match the basis");
  const Eigen::Index N = samples_.size();
  value_bar.setZero(N);
  grad_bar.setZero(2, N);
  const TriMesh& mesh = basis_->mesh();
  for (Eigen::Index p = 0; p < N; ++p) {
    const int t = samples_.triangle[p];
    const auto& G = basis_->bary_gradients(t);
    Eigen::Vector2d flux_bar = Eigen::Vector2d::Zero();
    double rest_bar = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int i = basis_->basis_index(mesh.triangles[t][k]);
      if (i < 0) continue;
      const double s = samples_.weight(p) * rbar(i);
      flux_bar += s * G.row(k).transpose();
      rest_bar += s * samples_.bary(k, p);
    }
    grad_bar.col(p) = A_[p].transpose() * flux_bar + rest_bar * beta_.col(p);
    value_bar(p) = rest_bar * c_(p);
  }
}

ResidualEstimate assemble_residuals(const P1Basis& basis, const PDEProblem& problem, const ValueGrad& w,
                                    const ValueGrad& lift, int mc_points_per_triangle, std::uint64_t seed) {
  ResidualAssembler assembler(basis, problem, sample_triangles(basis.mesh(), mc_points_per_triangle, seed));
  const Eigen::Index N = assembler.samples().size();
  Eigen::VectorXd value(N);
  Eigen::MatrixXd grad(2, N);
  for (Eigen::Index p = 0; p < N; ++p) {
    const Eigen::Vector2d x = assembler.samples().points.col(p);
    auto [wv, wg] = w(x);
    auto [lv, lg] = lift(x);
    value(p) = wv + lv;
    grad.col(p) = wg + lg;
  }
  return {assembler.residuals(value, grad), assembler.standard_errors(value, grad)};
}

double vpinn_loss(const Eigen::VectorXd& residuals, const Eigen::VectorXd& alpha) {
  if (residuals.size() != alpha.size()) throw std::invalid_argument("residual and weight lengths differ");
  if ((alpha.array() <= 0.0).any()) throw std::invalid_argument("residual weights must be positive");
  return (alpha.array() * residuals.array().square()).sum();
}

}  // namespace nnpde
