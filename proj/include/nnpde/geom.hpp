#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nnpde {

enum class DomainKind { unit_hypercube, l_shape };

/// unit_hypercube(d) = (0,1)^d. l_shape = (-1,1)^2 \ ([0,1) x (-1,0]), whose
/// re-entrant corner sits at the origin.
struct Domain {
  DomainKind kind = DomainKind::unit_hypercube;
  int dim = 2;

  static Domain unit_hypercube(int d);
  static Domain l_shape();

  std::string name() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;          // open set
  bool on_boundary(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-12) const;
  /// Axis-aligned bounding box [lo, hi]^d.
  double box_lo() const { return kind == DomainKind::l_shape ? -1.0 : 0.0; }
  double box_hi() const { return 1.0; }
};

struct Measures {
  double interior;
  double boundary;
};

Measures measures(const Domain& domain);

/// One straight boundary segment of a 2-D polygonal domain.
struct Edge {
  Eigen::Vector2d a, b;
  double length() const { return (b - a).norm(); }
};

/// The six edges of the L-shape, counterclockwise from (-1,-1).
const std::vector<Edge>& l_shape_edges();

/// Index of the boundary piece containing x: face 2k (x_k = 0) or 2k+1
/// (x_k = 1) for hypercubes, edge index for the L-shape. -1 if none.
int boundary_piece(const Domain& domain, const Eigen::Ref<const Eigen::VectorXd>& x,
                   double tol = 1e-12);
int boundary_piece_count(const Domain& domain);

enum class SampleOrigin { interior, boundary };

/// Points stored column-wise (d x n). Immutable by convention once sampled.
struct SampleSet {
  Eigen::MatrixXd points;
  SampleOrigin origin = SampleOrigin::interior;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.cols(); }
  int dim() const { return static_cast<int>(points.rows()); }
};

/// i.i.d. uniform interior points. The L-shape uses rejection from (-1,1)^2 and
/// also rejects points within 1e-8 of the re-entrant corner.
SampleSet sample_interior(const Domain& domain, Eigen::Index n, std::uint64_t seed);

/// i.i.d. uniform boundary points: a face/edge is picked with probability
/// proportional to its measure, then a uniform point on it.
SampleSet sample_boundary(const Domain& domain, Eigen::Index m, std::uint64_t seed);

/// CSV with header x1,...,xd and one point per row.
void write_csv(std::ostream& os, const SampleSet& samples);
SampleSet read_sample_csv(std::istream& is, SampleOrigin origin);

}  // namespace nnpde
