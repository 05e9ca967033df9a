#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nnpde/geom.hpp"
#include "nnpde/net.hpp"

namespace nnpde {

using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using PointEval = std::function<EvalResult(ConstVecRef)>;

/// -div(A grad u) + beta . grad u + c u = f in the domain, u = g on its boundary.
///
/// div_A(x)_j = sum_i d_i a_ij. When A is constant, `constant_A` holds it and
/// the losses use that to pick cheaper derivative channels.
struct PDEProblem {
  std::string id;
  Domain domain;
  std::function<Eigen::MatrixXd(ConstVecRef)> A;
  std::function<Eigen::VectorXd(ConstVecRef)> div_A;
  std::function<Eigen::VectorXd(ConstVecRef)> beta;
  std::function<double(ConstVecRef)> c;
  std::function<double(ConstVecRef)> f;
  std::function<double(ConstVecRef)> g;
  /// Exact solution with gradient and (where it exists) Hessian. Empty if unknown.
  PointEval exact;

  std::optional<Eigen::MatrixXd> constant_A;
  double ellipticity = 0.0;  // lambda with xi^T A xi >= lambda |xi|^2
  bool beta_zero = false;
  bool c_nonnegative = false;

  int dim() const { return domain.dim; }
  bool has_exact() const { return static_cast<bool>(exact); }
};

enum class BenchmarkId { ex2d, ex_lshape, ex_weak, ex4d, ex6d };

std::string to_string(BenchmarkId id);
BenchmarkId benchmark_from_string(const std::string& s);
const std::vector<BenchmarkId>& all_benchmarks();

/// The built-in benchmark problems:
///  ex2d      (0,1)^2, A = [[4,-1],[-1,3]], beta = (1,2), c = 2, u = sin(pi x1) sin(pi x2)
///  ex_lshape L-shape, Laplacian, radial source with r^{-5/3} and r^{-1} terms,
///            reference solution r^{2/3} sin(2 theta / 3)
///  ex_weak   (0,1)^2, Laplacian, f = 2, g = reference = min{x^2, (1-x)^2}
///  ex4d      (0,1)^4, Laplacian, u = prod sin(pi x_i)
///  ex6d      (0,1)^6, Laplacian, f = 0, u = x1 x2 + x3 x4 + x5 x6
PDEProblem builtin(BenchmarkId id);

/// -sum a_ij H_ij - div_A . grad + beta . grad + c u - f at x.
double strong_residual(const PDEProblem& problem, const EvalResult& u, ConstVecRef x);
double strong_residual(const PDEProblem& problem, const PointEval& u, ConstVecRef x);

/// Polar angle in [0, 2 pi) measured counterclockwise from the positive x-axis;
/// on the L-shape it covers [0, 3 pi / 2].
double l_shape_angle(double x, double y);

}  // namespace nnpde
