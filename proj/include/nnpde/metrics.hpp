#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <iosfwd>

#include "nnpde/geom.hpp"
#include "nnpde/model.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

inline constexpr Eigen::Index kValidationSize = 100000;
inline constexpr std::uint64_t kValidationSeed = 9999;

/// Interior points on their own seed stream together with the exact values there.
struct ValidationSet {
  SampleSet samples;
  Eigen::VectorXd exact;

  static ValidationSet make(const PDEProblem& problem, Eigen::Index size = kValidationSize,
                            std::uint64_t seed = kValidationSeed);
};

/// ||approx - exact|| / ||exact|| over the same points.
double l2_relative_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact);
double l2_relative_error(Model& u, const ValidationSet& validation);

/// Regular grid over two coordinates; the others are fixed at `slice`.
struct GridSpec {
  int nx = 64;
  int ny = 64;
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
  Eigen::VectorXd slice;  // full point; entries 0 and 1 are overwritten

  static GridSpec for_domain(const Domain& domain, int resolution = 64);
};

/// values(j, i) at (xs(i), ys(j)). NaN marks points outside the closed domain.
struct FieldGrid {
  Eigen::VectorXd xs, ys;
  Eigen::MatrixXd values;

  bool missing(int j, int i) const { return std::isnan(values(j, i)); }
};

/// Whether a grid point counts as part of the domain: its closure, minus the
/// closed excluded quadrant for the L-shape.
bool grid_member(const Domain& domain, const Eigen::Ref<const Eigen::VectorXd>& x);

FieldGrid field_grid(Model& u, const Domain& domain, const GridSpec& spec);
FieldGrid field_grid(const PointEval& u, const Domain& domain, const GridSpec& spec);
FieldGrid abs_error(const FieldGrid& a, const FieldGrid& b);

/// First row: blank then the x coordinates; first column: y coordinates.
/// Missing values are empty cells.
void write_csv(std::ostream& os, const FieldGrid& grid);

}  // namespace nnpde
