#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "nnpde/geom.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

/// 2-D triangulation with counterclockwise triangles.
struct TriMesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> node_is_boundary;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  double total_area() const;

  /// Throws std::runtime_error naming the first violated invariant: index
  /// range, positive area, every edge shared by at most two triangles, and
  /// endpoints of unshared edges flagged as boundary nodes.
  void validate() const;
};

/// Structured criss-cross mesh: square cells, each split into four triangles
/// through an added centre node. The cell count is chosen so the node count is
/// as close as possible to `target_nodes`.
TriMesh build_mesh(const Domain& domain, int target_nodes);

/// Criss-cross mesh of the domain's bounding box with `cells` cells per side,
/// keeping the cells whose centre lies in the domain. Boundary flags from
/// `domain`. For the L-shape `cells` must be even.
TriMesh criss_cross_mesh(const Domain& domain, int cells);

/// Text format: `nodes N`, N lines `x y b`, `triangles M`, M lines `i j k`.
void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);

/// Continuous piecewise-linear hat functions attached to the interior nodes.
class P1Basis {
 public:
  explicit P1Basis(TriMesh mesh);

  const TriMesh& mesh() const { return mesh_; }
  int size() const { return static_cast<int>(interior_.size()); }
  const std::vector<int>& interior_node_ids() const { return interior_; }
  /// Basis index of a node, -1 for boundary nodes.
  int basis_index(int node) const { return basis_of_node_[node]; }

  /// Gradients of the three barycentric coordinates on triangle t (rows).
  const Eigen::Matrix<double, 3, 2>& bary_gradients(int t) const { return bary_grad_[t]; }
  Eigen::Vector3d barycentric(int t, const Eigen::Vector2d& x) const;

  /// Triangle containing x, walking from `hint`; falls back to a linear scan.
  /// Returns -1 if no triangle contains x (within a small tolerance).
  int locate(const Eigen::Vector2d& x, int hint = 0) const;

  /// Value and gradient of hat i at x. The gradient is taken on the triangle
  /// found by `locate` (edges of the star are ambiguous). Throws if x is
  /// outside the mesh.
  std::pair<double, Eigen::Vector2d> eval(int i, const Eigen::Vector2d& x, int* hint = nullptr) const;

  /// Sum of all nodal hats (boundary ones included) at x. Equals 1 inside.
  double partition_of_unity(const Eigen::Vector2d& x) const;

  /// Area of the support of hat i.
  double star_area(int i) const;

 private:
  TriMesh mesh_;
  std::vector<int> interior_;
  std::vector<int> basis_of_node_;
  std::vector<Eigen::Matrix<double, 3, 2>> bary_grad_;
  std::vector<std::array<int, 3>> neighbour_;  // across the edge opposite vertex k
  std::vector<std::vector<int>> star_;         // triangles around each node
};

/// `per_triangle` uniform points in every triangle, stored triangle by
/// triangle. weight = |T| / per_triangle.
struct TriangleSamples {
  Eigen::MatrixXd points;  // 2 x N
  std::vector<int> triangle;
  Eigen::Matrix3Xd bary;
  Eigen::VectorXd weight;
  int per_triangle = 0;

  Eigen::Index size() const { return points.cols(); }
};

TriangleSamples sample_triangles(const TriMesh& mesh, int per_triangle, std::uint64_t seed);

/// Monte Carlo weak-form residuals
///   r_i = sum_T int_T grad(u)^T A grad(phi_i) + (beta . grad u) phi_i + c u phi_i - f phi_i
/// for a trial function u known at the sample points, and the adjoint of
/// sum_i rbar_i r_i back onto those point values.
class ResidualAssembler {
 public:
  ResidualAssembler(const P1Basis& basis, const PDEProblem& problem, TriangleSamples samples);

  const TriangleSamples& samples() const { return samples_; }
  const P1Basis& basis() const { return *basis_; }

  /// value: N, grad: 2 x N.
  Eigen::VectorXd residuals(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad) const;
  /// Estimated standard error of each residual (per-triangle sample variances).
  Eigen::VectorXd standard_errors(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad) const;
  /// d(sum_i rbar_i r_i)/d(value, grad) at every sample point.
  void adjoint(const Eigen::VectorXd& rbar, Eigen::VectorXd& value_bar, Eigen::MatrixXd& grad_bar) const;

 private:
  template <typename Visit>
  void for_each_term(const Eigen::VectorXd& value, const Eigen::MatrixXd& grad, Visit&& visit) const;

  const P1Basis* basis_;
  TriangleSamples samples_;
  std::vector<Eigen::Matrix2d> A_;
  Eigen::Matrix2Xd beta_;
  Eigen::VectorXd c_, f_;
};

/// Value and gradient of a function at a point; used for analytic adapters.
using ValueGrad = std::function<std::pair<double, Eigen::Vector2d>(const Eigen::Vector2d&)>;

struct ResidualEstimate {
  Eigen::VectorXd residuals;
  Eigen::VectorXd standard_errors;
};

/// Residuals of u = w + u_g with fresh per-triangle samples.
ResidualEstimate assemble_residuals(const P1Basis& basis, const PDEProblem& problem, const ValueGrad& w,
                                    const ValueGrad& lift, int mc_points_per_triangle, std::uint64_t seed);

/// sum_i alpha_i r_i^2.
double vpinn_loss(const Eigen::VectorXd& residuals, const Eigen::VectorXd& alpha);

}  // namespace nnpde
