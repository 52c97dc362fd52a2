#pragma once

#include <array>
#include <numbers>

#include <Eigen/Core>

namespace locpert {

using Index = Eigen::Index;

/// Points in R^dim stored column-wise: a (dim x n) matrix, one column per point.
using PointSet = Eigen::MatrixXd;

/// Periodic rectangular lattice in 1, 2 or 3 dimensions.
///
/// Node k on axis p sits at k * spacing(p), covering [0, extent(p)).  Values
/// living on the grid are stored row-major: the last axis varies fastest.
/// Axes beyond dim() are padded with a single point so that all index
/// arithmetic can be written for three axes.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::array<Index, 3> points, std::array<double, 3> extent);

  /// Cube-shaped grid with `n` points and length `extent` on every axis.
  static Grid uniform(int dim, Index n, double extent = 2.0 * std::numbers::pi);

  int dim() const { return dim_; }
  Index points(int axis) const { return points_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double min_spacing() const;

  Index size() const { return points_[0] * points_[1] * points_[2]; }
  double volume() const;
  double cell_volume() const { return volume() / static_cast<double>(size()); }

  Index flat(const std::array<Index, 3>& idx) const {
    return (idx[0] * points_[1] + idx[1]) * points_[2] + idx[2];
  }
  std::array<Index, 3> unflatten(Index flat) const;

  double coordinate(int axis, Index k) const { return static_cast<double>(k) * spacing_[axis]; }

  /// Coordinates of every node, in storage order.
  PointSet node_coordinates() const;

  /// Wraps a coordinate on `axis` into [0, extent).
  double wrap(int axis, double x) const;

  /// Shortest signed separation x - y on the periodic axis.
  double periodic_delta(int axis, double x, double y) const;

  void check_axis(int axis) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_ = 1;
  std::array<Index, 3> points_{1, 1, 1};
  std::array<double, 3> extent_{1.0, 1.0, 1.0};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
};

}  // namespace locpert
