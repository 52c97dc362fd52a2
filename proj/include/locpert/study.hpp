#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "locpert/tsw.hpp"

namespace locpert {

/// Inputs of a time-step refinement study.  Every metric is evaluated for a
/// single step from the given fields.
struct StudySetup {
  NoiseBasis basis;  // drift already installed
  Convention convention = Convention::Raw;
  NFormMode nform_mode = NFormMode::Flux;
  double safety_factor = 1.0;
  ScalarField f{};  // scalar test field (0-form, n-form and n-vector mismatches, first factor of pairings)
  ScalarField g{};  // second factor of the pairings
  std::optional<VectorField> u{};    // 1-form test field (dim >= 2)
  std::optional<VectorField> u3{};    // 3D field for the helicity drift, with its own basis
  std::optional<NoiseBasis> basis3{};  // basis on the grid of u3
  std::optional<TswState> tsw{};
  int quadrature_order = 3;
  std::uint64_t seed = 0;  // Brownian path for the pathwise metrics
};

/// Metric values over the study's dts.
///
/// The plain metric measures the conditional mean over the step's Brownian
/// increment (Gauss-Hermite quadrature on deta = sqrt(dt) xi).  The
/// `_pathwise` variant evaluates one matched Brownian path: the increment at
/// dt is the sum of the fine increments it spans.
struct MetricSeries {
  std::string name;
  std::vector<double> values;
  double slope = 0.0;
  double floor = 0.0;       // values at or below this are round-off
  bool at_roundoff = false; // every value <= floor
};

struct StudyResult {
  std::vector<double> dts;
  std::vector<MetricSeries> metrics;

  const MetricSeries& metric(const std::string& name) const;
};

/// Every metric name the setup supports, conditional-mean ones first.
std::vector<std::string> available_metrics(const StudySetup& setup);

/// Throws InvalidArgument with fewer than three dts, if the dts are not
/// integer multiples of the smallest one, or for an unknown metric name.
StudyResult convergence_study(const StudySetup& setup, const std::vector<double>& dts,
                              const std::vector<std::string>& metrics);

/// CSV `dt,metric,value,slope`; the slope column repeats the least-squares
/// log-log slope of that metric over all dts.
void write_study_csv(std::ostream& out, const StudyResult& result);

}  // namespace locpert
