#include "locpert/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "locpert/error.hpp"

namespace locpert {

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("quadrature order must be positive");
  // Golub-Welsch: the Jacobi matrix of the probabilists' Hermite recurrence
  // has zero diagonal and off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermite rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

TensorRule gauss_hermite_tensor(int m, int n) {
  if (m < 0) throw InvalidArgument("dimension must be non-negative");
  const GaussHermite g = gauss_hermite(n);
  Eigen::Index count = 1;
  for (int i = 0; i < m; ++i) count *= n;
  TensorRule rule;
  rule.nodes.resize(m, count);
  rule.weights.setOnes(count);
  for (Eigen::Index c = 0; c < count; ++c) {
    Eigen::Index rest = c;
    for (int i = 0; i < m; ++i) {
      const Eigen::Index k = rest % n;
      rest /= n;
      rule.nodes(i, c) = g.nodes(k);
      rule.weights(c) *= g.weights(k);
    }
  }
  return rule;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs at least two matched points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd lx(n), ly(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw InvalidArgument("slope fit needs positive values");
    lx(k) = std::log(x[k]);
    ly(k) = std::log(y[k]);
  }
  const Eigen::VectorXd cx = lx.array() - lx.mean();
  const Eigen::VectorXd cy = ly.array() - ly.mean();
  return cx.dot(cy) / cx.squaredNorm();
}

}  // namespace locpert
