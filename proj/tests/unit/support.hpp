#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nnpde/net.hpp"
#include "nnpde/rng.hpp"

namespace testing {

inline nnpde::NetworkParams<double> random_net(const std::vector<int>& widths, nnpde::Activation act,
                                               std::uint64_t seed, double scale = 1.0) {
  nnpde::NetworkParams<double> net(nnpde::NetworkArch{widths, act});
  nnpde::Rng rng(seed, nnpde::streams::test_init);
  for (Eigen::Index i = 0; i < net.size(); ++i) net.theta()(i) = rng.uniform(-scale, scale);
  return net;
}

inline Eigen::MatrixXd random_points(int d, Eigen::Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  nnpde::Rng rng(seed, 99);
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (int k = 0; k < d; ++k) x(k, j) = rng.uniform(lo, hi);
  return x;
}

/// Central differences of f over every entry of theta. f reads theta itself.
inline Eigen::VectorXd fd_gradient(Eigen::VectorXd& theta, const std::function<double()>& f, double h = 1e-6) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double t0 = theta(i);
    theta(i) = t0 + h;
    const double fp = f();
    theta(i) = t0 - h;
    const double fm = f();
    theta(i) = t0;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Gauss-Legendre nodes and weights on [lo, hi].
inline void gauss_legendre(int n, double lo, double hi, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  nodes = 0.5 * (hi - lo) * (eig.eigenvalues().array() + 1.0) + lo;
  weights = (hi - lo) * eig.eigenvectors().row(0).transpose().array().square();
}

}  // namespace testing
