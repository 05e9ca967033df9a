#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nnpde/geom.hpp"
#include "nnpde/problems.hpp"

using namespace nnpde;

namespace {

// Operator applied to the exact value by central differences, written out
// independently of strong_residual.
double fd_residual(const PDEProblem& p, const Eigen::VectorXd& x, double h = 1e-4) {
  const int d = p.dim();
  auto u = [&](const Eigen::VectorXd& y) { return p.exact(y).value; };
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd g(d);
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd ea = Eigen::VectorXd::Unit(d, a) * h;
    g(a) = (u(x + ea) - u(x - ea)) / (2 * h);
    for (int b = 0; b < d; ++b) {
      Eigen::VectorXd eb = Eigen::VectorXd::Unit(d, b) * h;
      H(a, b) = (u(x + ea + eb) - u(x + ea - eb) - u(x - ea + eb) + u(x - ea - eb)) / (4 * h * h);
    }
  }
  const Eigen::MatrixXd A = p.A(x);
  double r = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r -= A(i, j) * H(i, j);
  r += p.beta(x).dot(g) + p.c(x) * u(x) - p.f(x);
  return r;
}

void check_exact_derivatives(const PDEProblem& p, const Eigen::VectorXd& x) {
  const int d = p.dim();
  EvalResult e = p.exact(x);
  const double h = 1e-6;
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd ea = Eigen::VectorXd::Unit(d, a) * h;
    const double fd = (p.exact(x + ea).value - p.exact(x - ea).value) / (2 * h);
    CHECK((*e.grad)(a) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    Eigen::VectorXd col = (*p.exact(x + ea).grad - *p.exact(x - ea).grad) / (2 * h);
    for (int b = 0; b < d; ++b) CHECK((*e.hess)(a, b) == doctest::Approx(col(b)).epsilon(1e-5).scale(1.0));
  }
}

}  // namespace

TEST_CASE("ex2d data") {
  PDEProblem p = builtin(BenchmarkId::ex2d);
  CHECK(p.dim() == 2);
  CHECK(p.constant_A.has_value());
  CHECK(p.ellipticity == doctest::Approx((7.0 - std::sqrt(5.0)) / 2.0));
  CHECK_FALSE(p.beta_zero);
  Eigen::Vector2d x(0.3, 0.7);
  CHECK(p.A(x)(0, 1) == -1.0);
  CHECK(p.beta(x)(1) == 2.0);
  CHECK(p.c(x) == 2.0);
}

TEST_CASE("exact solutions have consistent derivatives") {
  check_exact_derivatives(builtin(BenchmarkId::ex2d), Eigen::Vector2d(0.31, 0.77));
  check_exact_derivatives(builtin(BenchmarkId::ex4d), Eigen::Vector4d(0.1, 0.4, 0.6, 0.85));
  Eigen::VectorXd x6(6);
  x6 << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  check_exact_derivatives(builtin(BenchmarkId::ex6d), x6);
  for (auto xy : {Eigen::Vector2d(0.4, 0.3), Eigen::Vector2d(-0.5, 0.2), Eigen::Vector2d(-0.3, -0.6),
                  Eigen::Vector2d(0.2, 0.05)})
    check_exact_derivatives(builtin(BenchmarkId::ex_lshape), xy);
  check_exact_derivatives(builtin(BenchmarkId::ex_weak), Eigen::Vector2d(0.2, 0.5));
  check_exact_derivatives(builtin(BenchmarkId::ex_weak), Eigen::Vector2d(0.8, 0.5));
}

TEST_CASE("smooth benchmarks: exact solution has zero strong residual") {
  for (BenchmarkId id : {BenchmarkId::ex2d, BenchmarkId::ex4d, BenchmarkId::ex6d}) {
    PDEProblem p = builtin(id);
    SampleSet s = sample_interior(p.domain, 50, 7);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      Eigen::VectorXd x = s.points.col(i);
      CHECK(std::abs(strong_residual(p, p.exact, x)) < 1e-10);
      CHECK(std::abs(fd_residual(p, x)) < 1e-5);
    }
  }
}

TEST_CASE("L-shape reference solution is harmonic, source is the radial expression") {
  PDEProblem p = builtin(BenchmarkId::ex_lshape);
  SampleSet s = sample_interior(p.domain, 50, 3);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Eigen::VectorXd x = s.points.col(i);
    if (x.norm() < 0.05) continue;
    const double r = x.norm();
    const double t = l_shape_angle(x(0), x(1));
    const double f = 2.0 / 27.0 * std::pow(r, -5.0 / 3.0) * std::sin(2 * t / 3) - 4.0 / 9.0 / r * std::sin(2 * t / 3);
    CHECK(p.f(x) == doctest::Approx(f));
    CHECK(strong_residual(p, p.exact, x) == doctest::Approx(-f).epsilon(1e-9));
  }
  // Boundary data vanishes on the edges adjacent to the corner.
  CHECK(std::abs(p.g(Eigen::Vector2d(0.5, 0.0))) < 1e-15);
  CHECK(std::abs(p.g(Eigen::Vector2d(0.0, -0.5))) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(l_shape_angle(0.0, -0.5) == doctest::Approx(1.5 * std::numbers::pi));
  CHECK(l_shape_angle(-1.0, 0.0) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("ex_weak reference is piecewise quadratic with constant piecewise residual") {
  PDEProblem p = builtin(BenchmarkId::ex_weak);
  CHECK(p.f(Eigen::Vector2d(0.1, 0.1)) == 2.0);
  CHECK(p.g(Eigen::Vector2d(0.25, 0.0)) == doctest::Approx(0.0625));
  CHECK(p.g(Eigen::Vector2d(0.75, 1.0)) == doctest::Approx(0.0625));
  CHECK(p.g(Eigen::Vector2d(0.0, 0.3)) == 0.0);
  CHECK(p.g(Eigen::Vector2d(1.0, 0.3)) == 0.0);
  for (double x : {0.1, 0.49, 0.51, 0.9}) CHECK(strong_residual(p, p.exact, Eigen::Vector2d(x, 0.4)) == doctest::Approx(-4.0));
}

TEST_CASE("benchmark ids round-trip") {
  for (BenchmarkId id : all_benchmarks()) CHECK(benchmark_from_string(to_string(id)) == id);
  CHECK_THROWS_AS(benchmark_from_string("ex3d"), std::invalid_argument);
}
