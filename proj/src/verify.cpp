#include "locpert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>

#include <unistd.h>

#include "locpert/calculus.hpp"
#include "locpert/conservation.hpp"
#include "locpert/error.hpp"
#include "locpert/quadrature.hpp"

namespace locpert {

CheckResult check_below(std::string name, double measured, double threshold, std::string note) {
  return {std::move(name), measured, threshold, measured < threshold, std::move(note)};
}

CheckResult check_at_least(std::string name, double measured, double threshold, std::string note) {
  return {std::move(name), measured, threshold, measured >= threshold, std::move(note)};
}

double flux_mass_drift(const TswState& initial, const NoiseBasis& basis, double dt, int steps, std::uint64_t seed,
                       double safety_factor) {
  ForecastOptions opt;
  opt.safety_factor = safety_factor;
  Rng rng(seed, 0);
  TswState s = initial;
  const double m0 = tsw_invariants(s).mass;
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    s = tsw_perturbation_step(s, basis, sample_increments(basis.size(), dt, rng), opt);
    worst = std::max(worst, std::abs(tsw_invariants(s).mass - m0) / std::abs(m0));
  }
  return worst;
}

double nform_flux_integral(const ScalarField& f, const NoiseBasis& basis, double dt, int samples,
                           std::uint64_t seed, double safety_factor) {
  Rng rng(seed, 0);
  const double scale = integrate(ScalarField(f.grid(), f.values().abs()));
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const DiffeoIncrement d = sample_diffeo(basis, dt, rng, Convention::Raw, safety_factor);
    worst = std::max(worst, std::abs(integrate(perturb_nform(f, d, NFormMode::Flux).realized)) / scale);
  }
  return worst;
}

std::vector<CheckResult> order_checks(const StudyResult& study, double min_slope) {
  std::vector<CheckResult> out;
  for (const auto& m : study.metrics) {
    if (m.at_roundoff) {
      const double worst = *std::max_element(m.values.begin(), m.values.end());
      out.push_back({"order_" + m.name, worst, m.floor, true, "every value at the round-off floor"});
      continue;
    }
    char note[64];
    std::snprintf(note, sizeof note, "log-log slope, finest value %.3g", m.values.back());
    out.push_back(check_at_least("order_" + m.name, std::isnan(m.slope) ? 0.0 : m.slope, min_slope, note));
  }
  return out;
}

NoiseBasis incompressible_lu_basis(const Grid& grid) {
  if (grid.dim() < 2) throw InvalidArgument("the incompressible basis needs dim >= 2");
  const std::vector<FourierModeSpec> specs{
      {{1, 0, 0}, {0, 0.5, 0}, true, ModePhase::Both},
      {{0, 2, 0}, {0.5, 0, 0}, true, ModePhase::Both},
      {{1, 1, 0}, {0.5, -0.5, 0}, true, ModePhase::Both},
  };
  return lu_basis(build_fourier_basis(grid, specs));
}

double lu_volume_multiplier(const NoiseBasis& basis, double dt, int samples, std::uint64_t seed,
                            double safety_factor) {
  Rng rng(seed, 0);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const DiffeoIncrement d = sample_diffeo(basis, dt, rng, Convention::LU, safety_factor);
    worst = std::max(worst, perturb_volume_multiplier(d).realized.max_abs());
  }
  return worst;
}

double degeneracy_gap(const RunConfig& cfg, int steps) {
  const Grid grid = make_grid(cfg);
  const NoiseBasis empty(grid);
  const Rhs rhs = make_rhs(cfg);
  State stochastic = make_state(cfg, grid);
  State deterministic = stochastic;
  Rng rng(cfg.seed, 0);
  double gap = 0.0;
  for (int k = 0; k < steps; ++k) {
    stochastic = model_step(cfg, stochastic, empty, sample_increments(0, cfg.dt, rng));
    deterministic = euler_step(deterministic, rhs, cfg.dt);
    for (std::size_t v = 0; v < stochastic.size(); ++v) {
      for (std::size_t c = 0; c < stochastic[v].components.size(); ++c) {
        const Eigen::ArrayXd diff = stochastic[v].components[c].values() - deterministic[v].components[c].values();
        gap = std::max(gap, diff.abs().maxCoeff());
      }
    }
  }
  return gap;
}

StudySetup helicity_setup() {
  const Grid g3 = Grid::uniform(3, 32);
  const NoiseBasis b3 = build_fourier_basis(g3, {{{1, 0, 0}, {0, 1, 0.5}, true, ModePhase::Both}});
  auto abc = [&](int c) {
    return ScalarField::from_function(g3, [c](const Eigen::Vector3d& x) {
      if (c == 0) return std::sin(x(2)) + 0.4 * std::cos(x(1));
      if (c == 1) return 0.7 * std::sin(x(0)) + std::cos(x(2));
      return 0.4 * std::sin(x(1)) + 0.7 * std::cos(x(0));
    });
  };
  const Grid g2 = Grid::uniform(2, 8);
  StudySetup s{.basis = NoiseBasis(g2)};
  s.f = ScalarField(g2, 1.0);
  s.safety_factor = 100.0;
  s.u3 = VectorField({abc(0), abc(1), abc(2)});
  s.basis3 = b3;
  return s;
}

namespace {

struct WeakSetup {
  Grid grid = Grid::uniform(2, 64);
  Eigen::Vector2d velocity{1.0, 0.5};
  double diffusivity = 0.01;
  double horizon = 0.1;
  double noise = 0.3;
  // f0 = Re sum c_k exp(i k.x)
  std::vector<std::pair<Eigen::Vector2d, std::complex<double>>> terms{
      {{1, 0}, {1.0, 0.0}},
      {{1, 2}, {0.0, -0.5}},
      {{0, 1}, {0.3, 0.2}},
  };

  NoiseBasis basis() const {
    std::vector<VectorField> modes;
    modes.push_back(VectorField({ScalarField(grid, noise), ScalarField(grid, 0.0)}));
    modes.push_back(VectorField({ScalarField(grid, 0.0), ScalarField(grid, noise)}));
    return NoiseBasis(grid, std::move(modes), true);
  }

  // Growth rate of exp(i k.x) under the mean equation.  With `discrete` the
  // derivatives are replaced by the symbols of the centered differences.
  std::complex<double> rate(const Eigen::Vector2d& k, bool discrete) const {
    Eigen::Vector2d s = k;
    if (discrete) {
      for (int p = 0; p < 2; ++p) s(p) = std::sin(k(p) * grid.spacing(p)) / grid.spacing(p);
    }
    const double diffusion = diffusivity * s.squaredNorm() + 0.5 * noise * noise * s.squaredNorm();
    return {-diffusion, -velocity.dot(s)};
  }

  ScalarField field(double t, bool discrete) const {
    return ScalarField::from_function(grid, [&](const Eigen::Vector3d& x) {
      double v = 0.0;
      for (const auto& [k, c] : terms) {
        v += std::real(c * std::exp(rate(k, discrete) * t) * std::exp(std::complex<double>(0.0, k.dot(x.head<2>()))));
      }
      return v;
    });
  }

  RunConfig config(double dt) const {
    RunConfig cfg;
    cfg.model = ModelKind::Advection;
    cfg.tensor = TensorClass::ZeroForm;
    cfg.dt = dt;
    cfg.n_steps = static_cast<int>(std::lround(horizon / dt));
    cfg.dim = 2;
    cfg.velocity = Eigen::Vector3d(velocity(0), velocity(1), 0.0);
    cfg.diffusivity = diffusivity;
    cfg.safety_factor = 4.0;
    return cfg;
  }

  State run(double dt, const std::function<BrownianIncrements()>& increments) const {
    const RunConfig cfg = config(dt);
    const NoiseBasis b = basis();
    State s{Variable{"f", TensorClass::ZeroForm, {field(0.0, false)}}};
    for (int k = 0; k < cfg.n_steps; ++k) s = model_step(cfg, s, b, increments());
    return s;
  }
};

double relative_l2(const ScalarField& a, const ScalarField& b) {
  return std::sqrt((a.values() - b.values()).square().sum() / b.values().square().sum());
}

}  // namespace

WeakConvergence weak_convergence(int members, std::uint64_t seed, const std::vector<double>& dts) {
  if (members < 1) throw InvalidArgument("the ensemble needs at least one member");
  if (dts.size() < 2) throw InvalidArgument("the weak order needs at least two time steps");
  const WeakSetup setup;
  WeakConvergence out;

  const double dt = *std::min_element(dts.begin(), dts.end());
  ScalarField mean(setup.grid);
  for (int m = 0; m < members; ++m) {
    Rng rng(seed, static_cast<std::uint64_t>(m));
    mean += setup.run(dt, [&] { return sample_increments(2, dt, rng); }).front().components.front();
  }
  mean *= 1.0 / members;
  out.ensemble_error = relative_l2(mean, setup.field(setup.horizon, false));

  // The step is affine in the increments and they have zero mean, so the
  // ensemble mean of the scheme is the run with zero increments.
  const ScalarField exact = setup.field(setup.horizon, true);
  out.dts = dts;
  for (double h : dts) {
    const State s = setup.run(h, [&] { return fixed_increments(h, Eigen::VectorXd::Zero(2)); });
    out.scheme_errors.push_back(relative_l2(s.front().components.front(), exact));
  }
  out.order = loglog_slope(out.dts, out.scheme_errors);
  return out;
}

VorticityRefinement vorticity_refinement(const RunConfig& cfg, const std::vector<Index>& points, double dt_fixed,
                                         const std::vector<double>& dts) {
  if (cfg.dim != 2) throw InvalidArgument("the vorticity commutation check needs dim = 2");
  if (!cfg.u.given) throw ConfigError("[init] u is needed for the vorticity commutation check");
  VorticityRefinement out;
  out.points = points;
  out.dts = dts;

  const int modes = make_basis(cfg, make_grid(cfg, {points.front(), points.front(), 1})).size();
  Rng rng(cfg.seed, 3);
  Eigen::VectorXd xi(modes);
  for (int i = 0; i < modes; ++i) xi(i) = rng.normal();

  auto defect = [&](Index n, double dt) {
    const Grid grid = make_grid(cfg, {n, n, 1});
    const NoiseBasis basis = make_basis(cfg, grid);
    const DiffeoIncrement d(basis, fixed_increments(dt, std::sqrt(dt) * xi), Convention::Raw, 100.0);
    return vorticity_commutation(make_vector(cfg.u, grid), d);
  };
  std::vector<double> hs;
  for (Index n : points) {
    hs.push_back(cfg.extent[0] / static_cast<double>(n));
    out.h_defects.push_back(defect(n, dt_fixed));
  }
  out.h_order = loglog_slope(hs, out.h_defects);
  for (double dt : dts) out.dt_defects.push_back(defect(points.back(), dt));
  out.dt_order = loglog_slope(dts, out.dt_defects);
  return out;
}

namespace {

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int reproducibility_mismatches(const RunConfig& cfg, const std::filesystem::path& scratch) {
  const auto a = scratch / "run_a";
  const auto b = scratch / "run_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  const RunSummary ra = run_simulation(cfg, a);
  const RunSummary rb = run_simulation(cfg, b);
  std::set<std::string> names(ra.files.begin(), ra.files.end());
  names.insert(rb.files.begin(), rb.files.end());
  names.insert("manifest.json");
  int mismatches = 0;
  for (const auto& n : names) {
    if (!std::filesystem::exists(a / n) || !std::filesystem::exists(b / n) || read_bytes(a / n) != read_bytes(b / n)) {
      ++mismatches;
    }
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  return mismatches;
}

std::vector<CheckResult> verify_suite(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  const Grid grid = make_grid(cfg);
  const NoiseBasis basis = make_basis(cfg, grid);
  const StudySetup study = make_study_setup(cfg);
  const ScalarField f = cfg.model == ModelKind::Tsw ? make_tsw_state(cfg, grid).h
                        : cfg.f.given                ? make_scalar(cfg.f, grid)
                                                     : ScalarField(grid, 1.0);

  if (cfg.dim == 2) {
    const TswState s = make_tsw_state(cfg, grid);
    const double drift = flux_mass_drift(s, basis, cfg.dt, 20, cfg.seed, cfg.safety_factor);
    out.push_back(check_below("flux_mass_conservation", drift, 1e-12,
                              "max |dMass|/Mass over 20 perturbation-only TSW steps"));
  }
  const double flux = nform_flux_integral(f, basis, cfg.dt, 10, cfg.seed, cfg.safety_factor);
  out.push_back(check_below("nform_flux_integral", flux, 1e-12, "max |integral of increment| / integral |f|"));

  std::vector<std::string> metrics;
  for (const auto& name : available_metrics(study)) {
    if (name.ends_with("_pathwise") || name == "vorticity_commutation" || name == "tsw_mass") continue;
    metrics.push_back(name);
  }
  for (auto& c : order_checks(convergence_study(study, cfg.study_dts, metrics), 1.4)) out.push_back(std::move(c));
  if (cfg.dim != 3) {
    for (auto& c : order_checks(convergence_study(helicity_setup(), cfg.study_dts, {"drift_helicity"}), 1.4)) {
      out.push_back(std::move(c));
    }
  }

  {
    Rng rng(cfg.seed, 2);
    out.push_back(check_below("lu_correspondence", lu_correspondence_check(basis, f, cfg.dt, rng, cfg.safety_factor),
                              1e-10, "installed drift, convention LU"));
    out.push_back(check_below("lu_nform", lu_nform_check(basis, f, cfg.dt, rng, cfg.safety_factor), 1e-10,
                              "installed drift, convention LU"));
    out.push_back(check_below("salt_correspondence",
                              salt_correspondence_check(basis, f, cfg.dt, rng, cfg.safety_factor), 1e-10,
                              "SALT drift installed by the check"));
  }
  if (cfg.dim >= 2) {
    const NoiseBasis incompressible = incompressible_lu_basis(grid);
    const double multiplier = lu_volume_multiplier(incompressible, cfg.dt, 10, cfg.seed, cfg.safety_factor);
    out.push_back(check_below("lu_incompressibility", multiplier, 1e-10, "max norm of the LU volume multiplier"));
  }
  const double gap = degeneracy_gap(cfg, 100);
  out.push_back({"degeneracy", gap, 0.0, gap == 0.0, "max |stochastic - deterministic| over 100 steps, empty basis"});

  const WeakConvergence weak = weak_convergence(256, cfg.seed, {0.02, 0.01, 0.005});
  out.push_back(check_below("weak_convergence_error", weak.ensemble_error, 0.02,
                            "256 members, relative L2 error of the mean at T=0.1"));
  out.push_back(check_at_least("weak_convergence_order", weak.order, 0.8, "scheme mean vs exact mean, dt 0.02..0.005"));

  if (cfg.dim == 2 && cfg.u.given) {
    const VorticityRefinement v = vorticity_refinement(cfg, {32, 64, 128, 256}, 1e-3, cfg.study_dts);
    out.push_back(check_at_least("vorticity_h_order", v.h_order, 1.8, "fixed dt 1e-3, one Brownian path"));
    out.push_back(check_at_least("vorticity_dt_order", v.dt_order, 1.4, "256^2 grid, one Brownian path"));
  }

  {
    RunConfig small = cfg;
    small.n_steps = std::min(cfg.n_steps, 10);
    small.ensemble = std::min(cfg.ensemble, 2);
    small.snapshot_every = 5;
    const auto scratch = std::filesystem::temp_directory_path() /
                         ("locpert-verify-" + std::to_string(cfg.seed) + "-" + std::to_string(::getpid()));
    const int bad = reproducibility_mismatches(small, scratch);
    std::filesystem::remove_all(scratch);
    out.push_back(check_below("reproducibility", bad, 0.5, "differing output files over two identical runs"));
  }
  return out;
}

void write_report(std::ostream& out, const std::vector<CheckResult>& checks) {
  char buf[512];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s %.6g %.6g %s", c.name.c_str(), c.measured, c.threshold,
                  c.pass ? "PASS" : "FAIL");
    out << buf;
    if (!c.note.empty()) out << "  # " << c.note;
    out << '\n';
  }
}

}  // namespace locpert
