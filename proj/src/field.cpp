#include "locpert/field.hpp"

#include <cmath>
#include <string>

#include "locpert/error.hpp"

namespace locpert {

std::string_view to_string(TensorClass c) {
  switch (c) {
    case TensorClass::ZeroForm: return "zero-form";
    case TensorClass::OneForm: return "one-form";
    case TensorClass::NForm: return "n-form";
    case TensorClass::NVector: return "n-vector";
    case TensorClass::VolumeForm: return "volume-form";
    case TensorClass::MixedPair: return "mixed-pair";
  }
  return "unknown";
}

void require_same_grid(const Grid& a, const Grid& b, std::string_view what) {
  if (!(a == b)) throw InvalidArgument("grid mismatch in " + std::string(what));
}

ScalarField::ScalarField(const Grid& grid, double value)
    : grid_(grid), values_(Eigen::ArrayXd::Constant(grid.size(), value)) {}

ScalarField::ScalarField(const Grid& grid, Eigen::ArrayXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) {
    throw InvalidArgument("field has " + std::to_string(values_.size()) + " values, grid has " +
                          std::to_string(grid.size()) + " nodes");
  }
}

double ScalarField::rms() const {
  if (values_.size() == 0) return 0.0;
  return std::sqrt(values_.square().mean());
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "field addition");
  values_ += o.values_;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "field subtraction");
  values_ -= o.values_;
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "field product");
  values_ *= o.values_;
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  values_ *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator-(ScalarField a) {
  a.values() = -a.values();
  return a;
}

VectorField::VectorField(const Grid& grid, double value)
    : grid_(grid), components_(static_cast<std::size_t>(grid.dim()), ScalarField(grid, value)) {}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("vector field needs at least one component");
  grid_ = components_.front().grid();
  if (static_cast<int>(components_.size()) != grid_.dim()) {
    throw InvalidArgument("vector field needs one component per grid axis");
  }
  for (const auto& c : components_) require_same_grid(grid_, c.grid(), "vector field components");
}

ScalarField VectorField::norm() const {
  Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(grid_.size());
  for (const auto& c : components_) sq += c.values().square();
  return ScalarField(grid_, sq.sqrt());
}

bool VectorField::all_finite() const {
  for (const auto& c : components_) {
    if (!c.all_finite()) return false;
  }
  return true;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "vector addition");
  for (int p = 0; p < dim(); ++p) components_[p] += o[p];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "vector subtraction");
  for (int p = 0; p < dim(); ++p) components_[p] -= o[p];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }
VectorField operator*(VectorField a, double s) { return a *= s; }
VectorField operator*(const ScalarField& s, VectorField a) {
  for (int p = 0; p < a.dim(); ++p) a[p] *= s;
  return a;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "dot product");
  ScalarField out(a.grid());
  for (int p = 0; p < a.dim(); ++p) out.values() += a[p].values() * b[p].values();
  return out;
}

}  // namespace locpert
