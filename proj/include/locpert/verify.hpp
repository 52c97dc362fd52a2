#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "locpert/run.hpp"

namespace locpert {

/// One line of the verification report.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

/// pass = measured < threshold
CheckResult check_below(std::string name, double measured, double threshold, std::string note = {});
/// pass = measured >= threshold
CheckResult check_at_least(std::string name, double measured, double threshold, std::string note = {});

/// Largest |Mass(t_k) - Mass(0)| / Mass(0) over `steps` perturbation-only TSW
/// steps with sampled increments.
double flux_mass_drift(const TswState& initial, const NoiseBasis& basis, double dt, int steps, std::uint64_t seed,
                       double safety_factor = 1.0);

/// Largest |integral of the flux-form n-form increment| relative to the
/// integral of |f| over `samples` sampled increments.
double nform_flux_integral(const ScalarField& f, const NoiseBasis& basis, double dt, int samples,
                           std::uint64_t seed, double safety_factor = 1.0);

/// One order check per metric: passes when the slope is at least
/// `min_slope` or every value is at the round-off floor.
std::vector<CheckResult> order_checks(const StudyResult& study, double min_slope);

/// Divergence-free sin/cos pairs whose diffusion tensor A is constant, so
/// the LU volume multiplier vanishes identically.
NoiseBasis incompressible_lu_basis(const Grid& grid);

/// Largest max-norm of the LU volume multiplier over `samples` increments.
double lu_volume_multiplier(const NoiseBasis& basis, double dt, int samples, std::uint64_t seed,
                            double safety_factor = 1.0);

/// Largest |stochastic - deterministic| over `steps` steps of the configured
/// model with an empty noise basis.
double degeneracy_gap(const RunConfig& cfg, int steps);

/// Fixed 3D setup for the helicity drift: an ABC flow on a 32^3 grid and one
/// solenoidal sin/cos mode.
StudySetup helicity_setup();

struct WeakConvergence {
  double ensemble_error = 0.0;  // relative L2 error of the ensemble mean vs the exact mean
  std::vector<double> dts;
  std::vector<double> scheme_errors;  // exact scheme mean vs the semi-discrete exact mean
  double order = 0.0;
};

/// Stochastic advection-diffusion with constant noise modes on a 64^2 grid:
/// a `members`-member ensemble at T = 0.1 against the exact mean, and the
/// weak order of the scheme mean over `dts`.
WeakConvergence weak_convergence(int members, std::uint64_t seed, const std::vector<double>& dts);

struct VorticityRefinement {
  std::vector<Index> points;
  std::vector<double> h_defects;  // fixed dt, refined grid
  double h_order = 0.0;
  std::vector<double> dts;
  std::vector<double> dt_defects;  // finest grid, refined dt
  double dt_order = 0.0;
};

/// Commutation defect of curl with the pull-back of the configured u under
/// the configured noise, on one Brownian path.
VorticityRefinement vorticity_refinement(const RunConfig& cfg, const std::vector<Index>& points, double dt_fixed,
                                         const std::vector<double>& dts);

/// Runs the configuration twice into fresh directories under `scratch` and
/// returns the number of output files whose bytes differ (or exist in one
/// run only).
int reproducibility_mismatches(const RunConfig& cfg, const std::filesystem::path& scratch);

/// The full suite on a configuration.
std::vector<CheckResult> verify_suite(const RunConfig& cfg);

/// `name measured threshold PASS|FAIL  # note`, one line per check.
void write_report(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace locpert
