#include <cmath>
#include <limits>

#include "doctest.h"
#include "nnpde/optim.hpp"

using namespace nnpde;

TEST_CASE("zero gradient leaves parameters unchanged") {
  for (OptimizerKind k : {OptimizerKind::sgd, OptimizerKind::adam, OptimizerKind::adagrad}) {
    Optimizer opt({k}, 4);
    Eigen::VectorXd theta(4);
    theta << 1, -2, 3, 0.5;
    const Eigen::VectorXd before = theta;
    opt.step(theta, Eigen::VectorXd::Zero(4), 0.1);
    opt.step(theta, Eigen::VectorXd::Zero(4), 0.1);
    CHECK(theta == before);
    CHECK(opt.step_count() == 2);
  }
}

TEST_CASE("adam first step moves by lr against the sign") {
  Optimizer opt({OptimizerKind::adam}, 3);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.003, 40.0;
  opt.step(theta, g, 1e-2);
  for (int i = 0; i < 3; ++i) CHECK(theta(i) == doctest::Approx(-1e-2 * (g(i) > 0 ? 1 : -1)).epsilon(1e-5));
  CHECK(opt.first_moment().isApprox(0.1 * g));
  CHECK(opt.second_moment().isApprox(0.001 * g.cwiseAbs2()));
}

TEST_CASE("adam matches a hand-rolled second step") {
  OptimizerConfig cfg{OptimizerKind::adam};
  Optimizer opt(cfg, 1);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  const double g1 = 0.5, g2 = -1.5, lr = 0.01;
  opt.step(theta, Eigen::VectorXd::Constant(1, g1), lr);
  const double after1 = theta(0);
  opt.step(theta, Eigen::VectorXd::Constant(1, g2), lr);
  const double m = 0.9 * 0.1 * g1 + 0.1 * g2;
  const double v = 0.999 * 0.001 * g1 * g1 + 0.001 * g2 * g2;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  CHECK(theta(0) == doctest::Approx(after1 - lr * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-13));
}

TEST_CASE("adagrad second step shrinks by sqrt 2") {
  Optimizer opt({OptimizerKind::adagrad}, 2);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd g(2);
  g << 3.0, -0.25;
  const double lr = 0.04;
  opt.step(theta, g, lr);
  const Eigen::VectorXd first = theta;
  opt.step(theta, g, lr);
  const Eigen::VectorXd second = theta - first;
  for (int i = 0; i < 2; ++i) {
    CHECK(first(i) == doctest::Approx(-lr * g(i) / (std::abs(g(i)) + 1e-10)));
    CHECK(second(i) == doctest::Approx(-lr * g(i) / (std::sqrt(2 * g(i) * g(i)) + 1e-10)).epsilon(1e-14));
    CHECK(std::abs(second(i)) == doctest::Approx(std::abs(first(i)) / std::sqrt(2.0)));
  }
  CHECK((opt.second_moment().array() >= 0).all());
}

TEST_CASE("adagrad accumulator is nondecreasing") {
  Optimizer opt({OptimizerKind::adagrad}, 3);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(3);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd g(3);
    g << std::sin(k), std::cos(3.0 * k), k % 3 - 1.0;
    opt.step(theta, g, 0.1);
    CHECK((opt.second_moment().array() >= prev.array()).all());
    prev = opt.second_moment();
  }
}

TEST_CASE("sgd converges linearly on a quadratic") {
  Eigen::VectorXd target(5);
  target << 1, -1, 2, 0.5, -3;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(5);
  Optimizer opt({OptimizerKind::sgd}, 5);
  const double lr = 0.3;  // grad = 2 (theta - target), contraction 1 - 2 lr
  double prev = (theta - target).norm();
  for (int k = 0; k < 40; ++k) {
    opt.step(theta, 2.0 * (theta - target), lr);
    const double err = (theta - target).norm();
    CHECK(err == doctest::Approx(0.4 * prev).epsilon(1e-9));
    prev = err;
  }
  CHECK(prev < 1e-14);
}

TEST_CASE("shape mismatch and non-finite gradients are rejected") {
  Optimizer opt({OptimizerKind::adam}, 3);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(opt.step(theta, Eigen::VectorXd::Zero(2), 0.1), std::invalid_argument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(theta, bad, 0.1), NonFiniteError);
  bad(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(opt.step(theta, bad, 0.1), NonFiniteError);
  CHECK(theta == Eigen::VectorXd::Zero(3));
  Eigen::VectorXd longer = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(opt.step(longer, Eigen::VectorXd::Zero(4), 0.1), std::invalid_argument);
}

TEST_CASE("learning-rate milestones multiply cumulatively") {
  LRSchedule s{1e-3, {{3000, 0.1}, {4000, 0.1}}};
  CHECK(s.at(0) == 1e-3);
  CHECK(s.at(2999) == 1e-3);
  CHECK(s.at(3000) == doctest::Approx(1e-4));
  CHECK(s.at(3999) == doctest::Approx(1e-4));
  CHECK(s.at(4000) == doctest::Approx(1e-5));
  CHECK(s.at(100000) == doctest::Approx(1e-5));
  CHECK(LRSchedule{0.015, {}}.at(5000) == 0.015);
}

TEST_CASE("optimizer names round trip") {
  for (OptimizerKind k : {OptimizerKind::sgd, OptimizerKind::adam, OptimizerKind::adagrad})
    CHECK(optimizer_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(optimizer_from_string("lbfgs"), std::invalid_argument);
}
