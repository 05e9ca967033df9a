#include "nnpde/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nnpde {

namespace {

constexpr double pi = std::numbers::pi;

PDEProblem constant_coefficients(std::string id, Domain domain, const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& beta, double c) {
  PDEProblem p;
  p.id = std::move(id);
  p.domain = domain;
  const int d = domain.dim;
  p.A = [A](ConstVecRef) { return A; };
  p.div_A = [d](ConstVecRef) { return Eigen::VectorXd::Zero(d).eval(); };
  p.beta = [beta](ConstVecRef) { return beta; };
  p.c = [c](ConstVecRef) { return c; };
  p.constant_A = A;
  p.ellipticity = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff();
  p.beta_zero = beta.isZero(0.0);
  p.c_nonnegative = c >= 0.0;
  return p;
}

PDEProblem make_ex2d() {
  Eigen::Matrix2d A;
  A << 4.0, -1.0, -1.0, 3.0;
  PDEProblem p = constant_coefficients("ex2d", Domain::unit_hypercube(2), A, Eigen::Vector2d(1.0, 2.0), 2.0);
  p.exact = [](ConstVecRef x) {
    const double s1 = std::sin(pi * x(0)), c1 = std::cos(pi * x(0));
    const double s2 = std::sin(pi * x(1)), c2 = std::cos(pi * x(1));
    EvalResult r;
    r.value = s1 * s2;
    r.grad = Eigen::Vector2d(pi * c1 * s2, pi * s1 * c2);
    Eigen::Matrix2d h;
    h << -pi * pi * s1 * s2, pi * pi * c1 * c2, pi * pi * c1 * c2, -pi * pi * s1 * s2;
    r.hess = h;
    return r;
  };
  // f = -div(A grad u) + beta . grad u + 2u, expanded by hand:
  // -(4 u_11 - 2 u_12 + 3 u_22) = 7 pi^2 u + 2 pi^2 cos cos.
  p.f = [](ConstVecRef x) {
    const double s1 = std::sin(pi * x(0)), c1 = std::cos(pi * x(0));
    const double s2 = std::sin(pi * x(1)), c2 = std::cos(pi * x(1));
    const double u = s1 * s2;
    return 7.0 * pi * pi * u + 2.0 * pi * pi * c1 * c2 + pi * c1 * s2 + 2.0 * pi * s1 * c2 + 2.0 * u;
  };
  p.g = [](ConstVecRef x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); };
  return p;
}

PDEProblem make_lshape() {
  PDEProblem p = constant_coefficients("ex_lshape", Domain::l_shape(), Eigen::Matrix2d::Identity(),
                                       Eigen::Vector2d::Zero(), 0.0);
  p.exact = [](ConstVecRef x) {
    const double r = std::hypot(x(0), x(1));
    const double t = l_shape_angle(x(0), x(1));
    EvalResult e;
    e.value = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * t / 3.0);
    if (r == 0.0) {
      e.grad = Eigen::Vector2d::Zero();
      return e;
    }
    // u = Im z^{2/3}: u_x = Im F', u_y = Re F', F' = (2/3) z^{-1/3}.
    const double g = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
    e.grad = Eigen::Vector2d(-g * std::sin(t / 3.0), g * std::cos(t / 3.0));
    const double h = 2.0 / 9.0 * std::pow(r, -4.0 / 3.0);
    Eigen::Matrix2d hess;
    hess << h * std::sin(4.0 * t / 3.0), -h * std::cos(4.0 * t / 3.0), -h * std::cos(4.0 * t / 3.0),
        -h * std::sin(4.0 * t / 3.0);
    e.hess = hess;
    return e;
  };
  p.f = [](ConstVecRef x) {
    const double r = std::hypot(x(0), x(1));
    const double s = std::sin(2.0 / 3.0 * l_shape_angle(x(0), x(1)));
    return 2.0 / 27.0 * std::pow(r, -5.0 / 3.0) * s - 4.0 / 9.0 / r * s;
  };
  p.g = [](ConstVecRef x) {
    const double r = std::hypot(x(0), x(1));
    return std::pow(r, 2.0 / 3.0) * std::sin(2.0 / 3.0 * l_shape_angle(x(0), x(1)));
  };
  return p;
}

PDEProblem make_weak() {
  PDEProblem p = constant_coefficients("ex_weak", Domain::unit_hypercube(2), Eigen::Matrix2d::Identity(),
                                       Eigen::Vector2d::Zero(), 0.0);
  auto reference = [](double x) { return std::min(x * x, (1.0 - x) * (1.0 - x)); };
  p.exact = [](ConstVecRef x) {
    EvalResult e;
    const bool left = x(0) <= 0.5;
    const double s = left ? x(0) : x(0) - 1.0;
    e.value = s * s;
    e.grad = Eigen::Vector2d(2.0 * s, 0.0);
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    h(0, 0) = 2.0;
    e.hess = h;
    return e;
  };
  p.f = [](ConstVecRef) { return 2.0; };
  p.g = [reference](ConstVecRef x) { return reference(x(0)); };
  return p;
}

PDEProblem make_ex4d() {
  PDEProblem p = constant_coefficients("ex4d", Domain::unit_hypercube(4), Eigen::Matrix4d::Identity(),
                                       Eigen::Vector4d::Zero(), 0.0);
  p.exact = [](ConstVecRef x) {
    const int d = 4;
    Eigen::Vector4d s, c;
    for (int k = 0; k < d; ++k) {
      s(k) = std::sin(pi * x(k));
      c(k) = std::cos(pi * x(k));
    }
    EvalResult e;
    e.value = s.prod();
    Eigen::Vector4d g;
    Eigen::Matrix4d h;
    for (int a = 0; a < d; ++a) {
      double ga = pi * c(a);
      for (int k = 0; k < d; ++k)
        if (k != a) ga *= s(k);
      g(a) = ga;
      for (int b = 0; b < d; ++b) {
        if (a == b) {
          h(a, a) = -pi * pi * e.value;
          continue;
        }
        double hab = pi * pi * c(a) * c(b);
        for (int k = 0; k < d; ++k)
          if (k != a && k != b) hab *= s(k);
        h(a, b) = hab;
      }
    }
    e.grad = g;
    e.hess = h;
    return e;
  };
  p.f = [](ConstVecRef x) {
    double u = 1.0;
    for (int k = 0; k < 4; ++k) u *= std::sin(pi * x(k));
    return 4.0 * pi * pi * u;
  };
  p.g = [](ConstVecRef) { return 0.0; };
  return p;
}

PDEProblem make_ex6d() {
  using Vector6d = Eigen::Matrix<double, 6, 1>;
  using Matrix6d = Eigen::Matrix<double, 6, 6>;
  PDEProblem p = constant_coefficients("ex6d", Domain::unit_hypercube(6), Matrix6d::Identity(),
                                       Vector6d::Zero(), 0.0);
  auto value = [](ConstVecRef x) { return x(0) * x(1) + x(2) * x(3) + x(4) * x(5); };
  p.exact = [value](ConstVecRef x) {
    EvalResult e;
    e.value = value(x);
    Vector6d g;
    g << x(1), x(0), x(3), x(2), x(5), x(4);
    e.grad = g;
    Matrix6d h = Matrix6d::Zero();
    for (int k = 0; k < 6; k += 2) h(k, k + 1) = h(k + 1, k) = 1.0;
    e.hess = h;
    return e;
  };
  p.f = [](ConstVecRef) { return 0.0; };
  p.g = value;
  return p;
}

}  // namespace

double l_shape_angle(double x, double y) {
  double t = std::atan2(y, x);
  if (t < 0.0) t += 2.0 * pi;
  return t;
}

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::ex2d: return "ex2d";
    case BenchmarkId::ex_lshape: return "ex_lshape";
    case BenchmarkId::ex_weak: return "ex_weak";
    case BenchmarkId::ex4d: return "ex4d";
    case BenchmarkId::ex6d: return "ex6d";
  }
  return "?";
}

BenchmarkId benchmark_from_string(const std::string& s) {
  for (BenchmarkId id : all_benchmarks())
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown problem id '" + s + "'");
}

const std::vector<BenchmarkId>& all_benchmarks() {
  static const std::vector<BenchmarkId> ids = {BenchmarkId::ex2d, BenchmarkId::ex_lshape, BenchmarkId::ex_weak,
                                                BenchmarkId::ex4d, BenchmarkId::ex6d};
  return ids;
}

PDEProblem builtin(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::ex2d: return make_ex2d();
    case BenchmarkId::ex_lshape: return make_lshape();
    case BenchmarkId::ex_weak: return make_weak();
    case BenchmarkId::ex4d: return make_ex4d();
    case BenchmarkId::ex6d: return make_ex6d();
  }
  throw std::invalid_argument("unknown benchmark");
}

double strong_residual(const PDEProblem& problem, const EvalResult& u, ConstVecRef x) {
  if (!u.hess || !u.grad) throw std::invalid_argument("strong residual needs gradient and Hessian");
  const Eigen::MatrixXd A = problem.A(x);
  const double diffusion = (A.array() * u.hess->array()).sum();
  const Eigen::VectorXd drift = problem.beta(x) - problem.div_A(x);
  return -diffusion + drift.dot(*u.grad) + problem.c(x) * u.value - problem.f(x);
}

double strong_residual(const PDEProblem& problem, const PointEval& u, ConstVecRef x) {
  return strong_residual(problem, u(x), x);
}

}  // namespace nnpde
