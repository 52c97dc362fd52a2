#include "locpert/grid.hpp"

#include <cmath>
#include <string>

#include "locpert/error.hpp"

namespace locpert {

Grid::Grid(int dim, std::array<Index, 3> points, std::array<double, 3> extent) : dim_(dim) {
  if (dim < 1 || dim > 3) {
    throw InvalidArgument("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  for (int p = 0; p < 3; ++p) {
    if (p < dim) {
      if (points[p] < 1) throw InvalidArgument("grid needs at least one point per axis");
      if (!(extent[p] > 0.0) || !std::isfinite(extent[p])) {
        throw InvalidArgument("grid extent must be positive and finite");
      }
      points_[p] = points[p];
      extent_[p] = extent[p];
      spacing_[p] = extent[p] / static_cast<double>(points[p]);
    } else {
      points_[p] = 1;
      extent_[p] = 1.0;
      spacing_[p] = 1.0;
    }
  }
}

Grid Grid::uniform(int dim, Index n, double extent) {
  return Grid(dim, {n, n, n}, {extent, extent, extent});
}

double Grid::min_spacing() const {
  double h = spacing_[0];
  for (int p = 1; p < dim_; ++p) h = std::min(h, spacing_[p]);
  return h;
}

double Grid::volume() const {
  double v = 1.0;
  for (int p = 0; p < dim_; ++p) v *= extent_[p];
  return v;
}

std::array<Index, 3> Grid::unflatten(Index flat) const {
  std::array<Index, 3> idx{};
  idx[2] = flat % points_[2];
  flat /= points_[2];
  idx[1] = flat % points_[1];
  idx[0] = flat / points_[1];
  return idx;
}

PointSet Grid::node_coordinates() const {
  PointSet x(dim_, size());
  for (Index n = 0; n < size(); ++n) {
    const auto idx = unflatten(n);
    for (int p = 0; p < dim_; ++p) x(p, n) = coordinate(p, idx[p]);
  }
  return x;
}

double Grid::wrap(int axis, double x) const {
  const double L = extent_[axis];
  double w = std::fmod(x, L);
  if (w < 0.0) w += L;
  if (w >= L) w -= L;
  return w;
}

double Grid::periodic_delta(int axis, double x, double y) const {
  const double L = extent_[axis];
  const double d = x - y;
  return d - L * std::round(d / L);
}

void Grid::check_axis(int axis) const {
  if (axis < 0 || axis >= dim_) {
    throw InvalidArgument("axis " + std::to_string(axis) + " out of range for a " +
                          std::to_string(dim_) + "-dimensional grid");
  }
}

}  // namespace locpert
