#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "locpert/grid.hpp"

namespace locpert {

/// Which tensor object a sampled field represents.  The perturbation applied
/// to a field depends only on this tag.
enum class TensorClass { ZeroForm, OneForm, NForm, NVector, VolumeForm, MixedPair };

std::string_view to_string(TensorClass c);

/// Real values sampled at the nodes of a periodic grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double value = 0.0);
  ScalarField(const Grid& grid, Eigen::ArrayXd values);

  /// Samples `fn(x)` at every node; `x` is an Eigen::Vector3d padded with zeros.
  template <class Fn>
  static ScalarField from_function(const Grid& grid, Fn&& fn) {
    Eigen::ArrayXd v(grid.size());
    for (Index n = 0; n < grid.size(); ++n) {
      const auto idx = grid.unflatten(n);
      Eigen::Vector3d x = Eigen::Vector3d::Zero();
      for (int p = 0; p < grid.dim(); ++p) x(p) = grid.coordinate(p, idx[p]);
      v(n) = fn(x);
    }
    return ScalarField(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  Index size() const { return values_.size(); }
  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }
  double operator[](Index n) const { return values_(n); }
  double& operator[](Index n) { return values_(n); }

  bool all_finite() const { return values_.isFinite().all(); }
  double max_abs() const { return values_.size() ? values_.abs().maxCoeff() : 0.0; }
  double rms() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  Eigen::ArrayXd values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator-(ScalarField a);

/// `dim` scalar components on a shared grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid, double value = 0.0);
  explicit VectorField(std::vector<ScalarField> components);

  const Grid& grid() const { return grid_; }
  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int p) const { return components_[p]; }
  ScalarField& operator[](int p) { return components_[p]; }
  const std::vector<ScalarField>& components() const { return components_; }

  /// Pointwise Euclidean norm.
  ScalarField norm() const;
  double max_norm() const { return norm().max_abs(); }
  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<ScalarField> components_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
VectorField operator*(VectorField a, double s);
VectorField operator*(const ScalarField& s, VectorField a);

/// Pointwise inner product.
ScalarField dot(const VectorField& a, const VectorField& b);

/// Throws InvalidArgument when the grids differ.
void require_same_grid(const Grid& a, const Grid& b, std::string_view what);

}  // namespace locpert
