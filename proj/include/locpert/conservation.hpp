#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "locpert/perturbation.hpp"

namespace locpert {

double total_integral(const ScalarField& f);

/// Integral of f * g^m.
double product_integral(const ScalarField& f, const ScalarField& g, int m);

/// Integral of f^2 g for an n-form f and an n-vector g.
double pairing_integral(const ScalarField& f, const ScalarField& g);

/// RMS of curl(realized 1-form increment of u) - (realized pointwise n-form
/// increment of curl u).  2D only.
double vorticity_commutation(const VectorField& u, const DiffeoIncrement& d);

/// Integral of u . curl u.  3D only.
double helicity(const VectorField& u);

/// |helicity(u + realized 1-form increment) - helicity(u)|
double helicity_drift(const VectorField& u, const DiffeoIncrement& d);

/// A named time series with strictly increasing times.
class DiagnosticSeries {
 public:
  explicit DiagnosticSeries(std::string name) : name_(std::move(name)) {}

  /// Throws InvalidArgument unless t is larger than the last recorded time.
  void push(double t, double value);

  const std::string& name() const { return name_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return times_.size(); }

  /// Header `time,<name>`, then one row per sample with 17 significant digits.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::string name_;
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace locpert
