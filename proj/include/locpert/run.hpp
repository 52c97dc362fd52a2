#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locpert/config.hpp"
#include "locpert/study.hpp"

namespace locpert {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable that overrides [run] output.
inline constexpr const char* kOutputDirEnv = "LOCPERT_OUTPUT_DIR";

enum class ModelKind { Advection, Tsw, PerturbationOnly };

enum class DriftKind { Auto, Zero, LU, SALT, Modes };

/// One noise mode: a single Fourier term (phase "both" gives a sin and a cos
/// mode) or, when `composite` is set, the sum of several terms.
struct NoiseModeSpec {
  std::vector<FourierModeSpec> terms;
  bool composite = false;
};

/// A field given as offset + sum of Fourier terms.  For scalar fields only
/// amplitude(0) is used.
struct FieldSpec {
  double offset = 0.0;
  std::vector<FourierModeSpec> terms;
  bool given = false;
};

struct RunConfig {
  ModelKind model = ModelKind::PerturbationOnly;
  TensorClass tensor = TensorClass::ZeroForm;
  double dt = 0.0;
  int n_steps = 0;
  int ensemble = 1;
  std::uint64_t seed = 0;
  std::string output = "locpert-out";
  std::vector<std::string> diagnostics;
  Convention convention = Convention::Raw;
  NFormMode nform_mode = NFormMode::Flux;
  int snapshot_every = 0;
  double safety_factor = 1.0;
  double stability_constant = 0.25;
  int threads = 0;

  int dim = 2;
  std::array<Index, 3> points{1, 1, 1};
  std::array<double, 3> extent{1.0, 1.0, 1.0};

  std::vector<NoiseModeSpec> modes;
  DriftKind drift = DriftKind::Auto;
  std::vector<FourierModeSpec> drift_terms;

  FieldSpec f, g, u, h, theta;

  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double diffusivity = 0.0;
  TswParams tsw;

  std::vector<double> study_dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  int quadrature_order = 3;
  std::vector<std::string> study_metrics;
  std::optional<std::array<Index, 3>> study_points;
  double study_safety_factor = 100.0;

  ConfigDocument document;
};

/// Validates every key; throws ConfigError naming the offending entry.
RunConfig parse_run_config(const ConfigDocument& doc);
RunConfig load_run_config(const std::filesystem::path& path);

Grid make_grid(const RunConfig& cfg);
Grid make_grid(const RunConfig& cfg, const std::array<Index, 3>& points);

/// Basis of the [noise] modes with the drift selected by `drift` and
/// `convention` installed.
NoiseBasis make_basis(const RunConfig& cfg, const Grid& grid);

ScalarField make_scalar(const FieldSpec& spec, const Grid& grid);
VectorField make_vector(const FieldSpec& spec, const Grid& grid);

/// Initial TSW state: h = h0 + terms, theta = theta0 + terms, u = terms
/// (offsets in [init] replace h0 and theta0 when given).
TswState make_tsw_state(const RunConfig& cfg, const Grid& grid);

/// Initial state of the configured model, in forecast layout.
State make_state(const RunConfig& cfg, const Grid& grid);

/// Deterministic tendency of the configured model (empty for
/// perturbation-only runs).
Rhs make_rhs(const RunConfig& cfg);

ForecastOptions make_options(const RunConfig& cfg, const NoiseBasis& basis);

/// One deterministic-plus-perturbation step of the configured model.
State model_step(const RunConfig& cfg, const State& state, const NoiseBasis& basis,
                 const BrownianIncrements& increments);

/// Diagnostic value by name; throws ConfigError for names the model lacks.
double diagnostic(const RunConfig& cfg, const std::string& name, const State& state);

/// Default diagnostics of the configured model.
std::vector<std::string> default_diagnostics(const RunConfig& cfg);

/// Output directory after applying the environment override.
std::filesystem::path output_directory(const RunConfig& cfg);

struct RunSummary {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory, sorted
};

/// Runs every ensemble member and writes per-member diagnostic CSVs, .fld
/// snapshots, ensemble-mean snapshots (ensemble > 1) and manifest.json.
/// Runtime aborts are rethrown as RuntimeAbort naming member and step.
RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& directory);

/// Study inputs for the configured fields on the [study] grid.
StudySetup make_study_setup(const RunConfig& cfg);

/// Study metrics requested in [study] metrics, or all available ones.
StudyResult run_convergence(const RunConfig& cfg, const std::vector<double>& dts);

}  // namespace locpert
