#pragma once

#include <vector>

#include <Eigen/Core>

namespace locpert {

/// n-point Gauss-Hermite rule for the standard normal density: sum_k w_k
/// q(x_k) = E[q(X)], X ~ N(0, 1), exactly for polynomials of degree < 2n.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussHermite gauss_hermite(int n);

/// Tensor-product rule in m dimensions: one column of `nodes` per point.
struct TensorRule {
  Eigen::MatrixXd nodes;  // m x n^m
  Eigen::VectorXd weights;
};

TensorRule gauss_hermite_tensor(int m, int n);

/// Least-squares slope of log(y) against log(x).  Throws InvalidArgument on
/// fewer than two points or non-positive values.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace locpert
