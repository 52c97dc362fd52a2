#include "locpert/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

#include "locpert/calculus.hpp"
#include "locpert/conservation.hpp"
#include "locpert/error.hpp"
#include "locpert/snapshot.hpp"

namespace locpert {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void require_known(const ConfigDocument& doc, const std::string& section, const std::set<std::string>& known) {
  for (const auto& key : doc.keys(section)) {
    if (!known.count(key)) bad("[" + section + "] " + key, "unknown key");
  }
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) bad(where, "expected true or false");
  return v.get<bool>();
}

std::vector<double> as_numbers(const Json& v, const std::string& where) {
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) bad(where, "expected a number or an array of numbers");
  for (const auto& x : v) out.push_back(as_number(x, where));
  return out;
}

Eigen::Vector3d as_vec3(const Json& v, int dim, const std::string& where) {
  const auto xs = as_numbers(v, where);
  if (static_cast<int>(xs.size()) != dim) bad(where, "expected " + std::to_string(dim) + " components");
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int p = 0; p < dim; ++p) out(p) = xs[p];
  return out;
}

ModePhase as_phase(const Json& v, const std::string& where) {
  const std::string s = as_string(v, where);
  if (s == "sin") return ModePhase::Sin;
  if (s == "cos") return ModePhase::Cos;
  if (s == "both") return ModePhase::Both;
  bad(where, "phase must be \"sin\", \"cos\" or \"both\"");
}

// {k = [...], amp = ..., solenoidal = bool, phase = "..."}
FourierModeSpec parse_term(const Json& t, int dim, bool vector_amp, ModePhase default_phase,
                           const std::string& where) {
  if (!t.is_object()) bad(where, "expected an inline table {k = [...], amp = ...}");
  for (const auto& [key, _] : t.items()) {
    if (key != "k" && key != "amp" && key != "solenoidal" && key != "phase") bad(where, "unknown field '" + key + "'");
  }
  FourierModeSpec s;
  s.phase = default_phase;
  if (t.contains("k")) s.wavevector = as_vec3(t["k"], dim, where + " k");
  if (!t.contains("amp")) bad(where, "missing amp");
  if (vector_amp) {
    s.amplitude = as_vec3(t["amp"], dim, where + " amp");
  } else {
    s.amplitude(0) = as_number(t["amp"], where + " amp");
  }
  if (t.contains("solenoidal")) s.solenoidal = as_bool(t["solenoidal"], where + " solenoidal");
  if (t.contains("phase")) s.phase = as_phase(t["phase"], where + " phase");
  return s;
}

NoiseModeSpec parse_mode(const Json& t, int dim, const std::string& where) {
  NoiseModeSpec m;
  if (t.is_object() && t.contains("terms")) {
    if (t.size() != 1) bad(where, "a composite mode holds only 'terms'");
    if (!t["terms"].is_array() || t["terms"].empty()) bad(where, "terms must be a non-empty array");
    m.composite = true;
    for (const auto& term : t["terms"]) {
      auto s = parse_term(term, dim, true, ModePhase::Sin, where + " term");
      if (s.phase == ModePhase::Both) bad(where, "terms of a composite mode need phase \"sin\" or \"cos\"");
      m.terms.push_back(s);
    }
  } else {
    m.terms.push_back(parse_term(t, dim, true, ModePhase::Both, where));
  }
  return m;
}

FieldSpec parse_field(const ConfigDocument& doc, const std::string& name, int dim, bool vector_amp) {
  FieldSpec f;
  for (const auto& t : doc.get_all("init", name)) {
    f.terms.push_back(parse_term(t, dim, vector_amp, ModePhase::Sin, "[init] " + name));
    f.given = true;
  }
  const std::string off = name + "_offset";
  if (doc.has("init", off)) {
    if (vector_amp) bad("[init] " + off, "vector fields take no offset");
    f.offset = as_number(doc.get("init", off), "[init] " + off);
    f.given = true;
  }
  return f;
}

template <class T>
T get_or(const ConfigDocument& doc, const std::string& section, const std::string& key, T fallback,
         T (*conv)(const Json&, const std::string&)) {
  if (!doc.has(section, key)) return fallback;
  return conv(doc.get(section, key), "[" + section + "] " + key);
}

std::array<Index, 3> parse_points(const Json& v, int dim, const std::string& where) {
  const auto xs = as_numbers(v, where);
  std::array<Index, 3> pts{1, 1, 1};
  if (xs.size() == 1) {
    for (int p = 0; p < dim; ++p) pts[p] = static_cast<Index>(xs[0]);
  } else if (static_cast<int>(xs.size()) == dim) {
    for (int p = 0; p < dim; ++p) pts[p] = static_cast<Index>(xs[p]);
  } else {
    bad(where, "expected one count or one per axis");
  }
  for (int p = 0; p < dim; ++p) {
    if (pts[p] < 3) bad(where, "need at least 3 points per axis");
  }
  return pts;
}

TensorClass parse_tensor(const std::string& s) {
  if (s == "zero-form") return TensorClass::ZeroForm;
  if (s == "one-form") return TensorClass::OneForm;
  if (s == "n-form") return TensorClass::NForm;
  if (s == "n-vector") return TensorClass::NVector;
  if (s == "volume-form") return TensorClass::VolumeForm;
  if (s == "mixed-pair") return TensorClass::MixedPair;
  bad("[run] tensor", "must be zero-form, one-form, n-form, n-vector, volume-form or mixed-pair");
}

}  // namespace

RunConfig parse_run_config(const ConfigDocument& doc) {
  RunConfig cfg;
  cfg.document = doc;
  for (const auto& s : doc.sections()) {
    static const std::set<std::string> known{"run", "grid", "noise", "init", "model", "study"};
    if (!known.count(s)) bad("[" + s + "]", "unknown section");
  }
  require_known(doc, "run",
                {"model", "tensor", "dt", "n_steps", "ensemble", "seed", "output", "diagnostics", "convention",
                 "nform_mode", "snapshot_every", "safety_factor", "stability_constant", "threads"});
  require_known(doc, "grid", {"dim", "points", "extent"});
  require_known(doc, "noise", {"mode", "drift", "drift_mode"});
  require_known(doc, "init", {"f", "f_offset", "g", "g_offset", "u", "h", "h_offset", "theta", "theta_offset"});
  require_known(doc, "model", {"velocity", "diffusivity", "kappa", "h0", "theta0", "fcor"});
  require_known(doc, "study", {"dts", "quadrature", "metrics", "points", "safety_factor"});

  const std::string model = as_string(doc.get("run", "model"), "[run] model");
  if (model == "advection") {
    cfg.model = ModelKind::Advection;
  } else if (model == "tsw") {
    cfg.model = ModelKind::Tsw;
  } else if (model == "perturbation-only") {
    cfg.model = ModelKind::PerturbationOnly;
  } else {
    bad("[run] model", "must be advection, tsw or perturbation-only");
  }
  if (doc.has("run", "tensor")) cfg.tensor = parse_tensor(as_string(doc.get("run", "tensor"), "[run] tensor"));

  cfg.dt = as_number(doc.get("run", "dt"), "[run] dt");
  if (!(cfg.dt > 0.0)) bad("[run] dt", "must be positive");
  cfg.n_steps = static_cast<int>(as_integer(doc.get("run", "n_steps"), "[run] n_steps"));
  if (cfg.n_steps < 1) bad("[run] n_steps", "must be at least 1");
  cfg.ensemble = static_cast<int>(get_or<std::int64_t>(doc, "run", "ensemble", 1, as_integer));
  if (cfg.ensemble < 1) bad("[run] ensemble", "must be at least 1");
  const auto seed = get_or<std::int64_t>(doc, "run", "seed", 0, as_integer);
  if (seed < 0) bad("[run] seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output = get_or<std::string>(doc, "run", "output", cfg.output, as_string);
  cfg.snapshot_every = static_cast<int>(get_or<std::int64_t>(doc, "run", "snapshot_every", 0, as_integer));
  if (cfg.snapshot_every < 0) bad("[run] snapshot_every", "must be non-negative");
  cfg.safety_factor = get_or<double>(doc, "run", "safety_factor", 1.0, as_number);
  if (!(cfg.safety_factor > 0.0)) bad("[run] safety_factor", "must be positive");
  cfg.stability_constant = get_or<double>(doc, "run", "stability_constant", 0.25, as_number);
  if (!(cfg.stability_constant > 0.0)) bad("[run] stability_constant", "must be positive");
  cfg.threads = static_cast<int>(get_or<std::int64_t>(doc, "run", "threads", 0, as_integer));
  if (cfg.threads < 0) bad("[run] threads", "must be non-negative");

  const std::string conv = get_or<std::string>(doc, "run", "convention", "raw", as_string);
  if (conv == "raw") {
    cfg.convention = Convention::Raw;
  } else if (conv == "lu") {
    cfg.convention = Convention::LU;
  } else if (conv == "salt") {
    cfg.convention = Convention::SALT;
  } else {
    bad("[run] convention", "must be raw, lu or salt");
  }
  const std::string nf = get_or<std::string>(doc, "run", "nform_mode", "flux", as_string);
  if (nf == "flux") {
    cfg.nform_mode = NFormMode::Flux;
  } else if (nf == "pointwise") {
    cfg.nform_mode = NFormMode::Pointwise;
  } else {
    bad("[run] nform_mode", "must be flux or pointwise");
  }

  cfg.dim = static_cast<int>(as_integer(doc.get("grid", "dim"), "[grid] dim"));
  if (cfg.dim < 1 || cfg.dim > 3) bad("[grid] dim", "must be 1, 2 or 3");
  cfg.points = parse_points(doc.get("grid", "points"), cfg.dim, "[grid] points");
  for (int p = 0; p < cfg.dim; ++p) cfg.extent[p] = 2.0 * std::numbers::pi;
  if (doc.has("grid", "extent")) {
    const auto xs = as_numbers(doc.get("grid", "extent"), "[grid] extent");
    if (xs.size() != 1 && static_cast<int>(xs.size()) != cfg.dim) bad("[grid] extent", "expected one value or one per axis");
    for (int p = 0; p < cfg.dim; ++p) {
      cfg.extent[p] = xs.size() == 1 ? xs[0] : xs[p];
      if (!(cfg.extent[p] > 0.0)) bad("[grid] extent", "must be positive");
    }
  }

  for (const auto& m : doc.get_all("noise", "mode")) cfg.modes.push_back(parse_mode(m, cfg.dim, "[noise] mode"));
  const std::string drift = get_or<std::string>(doc, "noise", "drift", "auto", as_string);
  if (drift == "auto") {
    cfg.drift = DriftKind::Auto;
  } else if (drift == "zero") {
    cfg.drift = DriftKind::Zero;
  } else if (drift == "lu") {
    cfg.drift = DriftKind::LU;
  } else if (drift == "salt") {
    cfg.drift = DriftKind::SALT;
  } else if (drift == "modes") {
    cfg.drift = DriftKind::Modes;
  } else {
    bad("[noise] drift", "must be auto, zero, lu, salt or modes");
  }
  for (const auto& t : doc.get_all("noise", "drift_mode")) {
    cfg.drift_terms.push_back(parse_term(t, cfg.dim, true, ModePhase::Sin, "[noise] drift_mode"));
  }
  if (cfg.drift == DriftKind::Modes && cfg.drift_terms.empty()) bad("[noise] drift", "\"modes\" needs drift_mode entries");
  if (cfg.drift != DriftKind::Modes && !cfg.drift_terms.empty()) bad("[noise] drift_mode", "only used with drift = \"modes\"");

  cfg.f = parse_field(doc, "f", cfg.dim, false);
  cfg.g = parse_field(doc, "g", cfg.dim, false);
  cfg.u = parse_field(doc, "u", cfg.dim, true);
  cfg.h = parse_field(doc, "h", cfg.dim, false);
  cfg.theta = parse_field(doc, "theta", cfg.dim, false);

  if (doc.has("model", "velocity")) cfg.velocity = as_vec3(doc.get("model", "velocity"), cfg.dim, "[model] velocity");
  cfg.diffusivity = get_or<double>(doc, "model", "diffusivity", 0.0, as_number);
  if (cfg.diffusivity < 0.0) bad("[model] diffusivity", "must be non-negative");
  cfg.tsw.kappa = get_or<double>(doc, "model", "kappa", 0.0, as_number);
  cfg.tsw.h0 = get_or<double>(doc, "model", "h0", 1.0, as_number);
  cfg.tsw.theta0 = get_or<double>(doc, "model", "theta0", 1.0, as_number);
  cfg.tsw.fcor = get_or<double>(doc, "model", "fcor", 0.0, as_number);
  if (cfg.tsw.kappa < 0.0) bad("[model] kappa", "must be non-negative");
  if (!(cfg.tsw.h0 > 0.0) || !(cfg.tsw.theta0 > 0.0)) bad("[model] h0/theta0", "must be positive");

  if (cfg.model == ModelKind::Tsw && cfg.dim != 2) bad("[grid] dim", "the tsw model needs dim = 2");
  if (cfg.model != ModelKind::Tsw) {
    const bool needs_u = cfg.tensor == TensorClass::OneForm;
    if (cfg.tensor == TensorClass::OneForm && cfg.dim < 2) bad("[run] tensor", "one-form needs dim >= 2");
    if (needs_u && !cfg.u.given) bad("[init] u", "one-form runs need u entries");
    if (!needs_u && !cfg.f.given) bad("[init] f", "missing initial field");
    if (cfg.tensor == TensorClass::MixedPair && !cfg.g.given) bad("[init] g", "mixed-pair runs need g");
  }

  if (doc.has("study", "dts")) cfg.study_dts = as_numbers(doc.get("study", "dts"), "[study] dts");
  cfg.quadrature_order = static_cast<int>(get_or<std::int64_t>(doc, "study", "quadrature", 3, as_integer));
  if (cfg.quadrature_order < 1 || cfg.quadrature_order > 8) bad("[study] quadrature", "must be between 1 and 8");
  if (doc.has("study", "metrics")) {
    const Json& m = doc.get("study", "metrics");
    if (!m.is_array()) bad("[study] metrics", "expected an array of names");
    for (const auto& x : m) cfg.study_metrics.push_back(as_string(x, "[study] metrics"));
  }
  if (doc.has("study", "points")) cfg.study_points = parse_points(doc.get("study", "points"), cfg.dim, "[study] points");
  cfg.study_safety_factor = get_or<double>(doc, "study", "safety_factor", 100.0, as_number);

  if (doc.has("run", "diagnostics")) {
    const Json& d = doc.get("run", "diagnostics");
    if (!d.is_array()) bad("[run] diagnostics", "expected an array of names");
    for (const auto& x : d) cfg.diagnostics.push_back(as_string(x, "[run] diagnostics"));
  } else {
    cfg.diagnostics = default_diagnostics(cfg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(ConfigDocument::load(path)); }

Grid make_grid(const RunConfig& cfg) { return make_grid(cfg, cfg.points); }

Grid make_grid(const RunConfig& cfg, const std::array<Index, 3>& points) {
  return Grid(cfg.dim, points, cfg.extent);
}

NoiseBasis make_basis(const RunConfig& cfg, const Grid& grid) {
  std::vector<VectorField> modes;
  bool solenoidal = true;
  try {
    for (const auto& m : cfg.modes) {
      if (!m.composite) {
        if (!m.terms[0].solenoidal && !m.terms[0].wavevector.isZero()) solenoidal = false;
        for (auto& e : fourier_modes(grid, m.terms[0])) modes.push_back(std::move(e));
        continue;
      }
      VectorField sum(grid);
      for (const auto& t : m.terms) {
        if (!t.solenoidal && !t.wavevector.isZero()) solenoidal = false;
        for (const auto& e : fourier_modes(grid, t)) sum += e;
      }
      modes.push_back(std::move(sum));
    }
  } catch (const InvalidArgument& e) {
    bad("[noise] mode", e.what());
  }
  NoiseBasis basis(grid, std::move(modes), solenoidal);

  DriftKind kind = cfg.drift;
  if (kind == DriftKind::Auto) {
    kind = cfg.convention == Convention::LU ? DriftKind::LU
           : cfg.convention == Convention::SALT ? DriftKind::SALT
                                                : DriftKind::Zero;
  }
  switch (kind) {
    case DriftKind::Zero:
    case DriftKind::Auto: return basis;
    case DriftKind::LU: return lu_basis(basis);
    case DriftKind::SALT: return salt_basis(basis);
    case DriftKind::Modes:
      try {
        return basis.with_drift(fourier_vector_field(grid, cfg.drift_terms));
      } catch (const InvalidArgument& e) {
        bad("[noise] drift_mode", e.what());
      }
  }
  return basis;
}

ScalarField make_scalar(const FieldSpec& spec, const Grid& grid) {
  ScalarField out(grid, spec.offset);
  for (const auto& t : spec.terms) {
    try {
      for (const auto& m : fourier_modes(grid, t)) out += m[0];
    } catch (const InvalidArgument& e) {
      bad("[init]", e.what());
    }
  }
  return out;
}

VectorField make_vector(const FieldSpec& spec, const Grid& grid) {
  try {
    return fourier_vector_field(grid, spec.terms);
  } catch (const InvalidArgument& e) {
    bad("[init] u", e.what());
  }
}

TswState make_tsw_state(const RunConfig& cfg, const Grid& grid) {
  FieldSpec h = cfg.h, theta = cfg.theta;
  if (!cfg.document.has("init", "h_offset")) h.offset = cfg.tsw.h0;
  if (!cfg.document.has("init", "theta_offset")) theta.offset = cfg.tsw.theta0;
  TswState s{make_scalar(h, grid), make_scalar(theta, grid), make_vector(cfg.u, grid)};
  try {
    check_tsw_positivity(s);
  } catch (const PositivityError& e) {
    bad("[init]", e.what());
  }
  return s;
}

State make_state(const RunConfig& cfg, const Grid& grid) {
  if (cfg.model == ModelKind::Tsw) return tsw_to_state(make_tsw_state(cfg, grid));
  Variable v;
  v.tensor = cfg.tensor;
  switch (cfg.tensor) {
    case TensorClass::OneForm:
      v.name = "u";
      v.components = make_vector(cfg.u, grid).components();
      break;
    case TensorClass::MixedPair:
      v.name = "fg";
      v.components = {make_scalar(cfg.f, grid), make_scalar(cfg.g, grid)};
      break;
    default:
      v.name = "f";
      v.components = {make_scalar(cfg.f, grid)};
  }
  return {v};
}

Rhs make_rhs(const RunConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::PerturbationOnly: return {};
    case ModelKind::Advection: {
      const Eigen::Vector3d vel = cfg.velocity;
      const double diff = cfg.diffusivity;
      return [vel, diff](const State& s) {
        Tendency t;
        for (const auto& v : s) {
          const Grid& g = v.components.front().grid();
          std::vector<ScalarField> vc;
          for (int p = 0; p < g.dim(); ++p) vc.emplace_back(g, vel(p));
          const VectorField u(std::move(vc));
          std::vector<ScalarField> out;
          for (const auto& c : v.components) out.push_back(advection_diffusion_rhs(c, u, diff));
          t.push_back(std::move(out));
        }
        return t;
      };
    }
    case ModelKind::Tsw: {
      const TswParams params = cfg.tsw;
      return [params](const State& s) {
        const TswState t = tsw_deterministic_rhs(tsw_from_state(s), params);
        return Tendency{{t.h}, {t.theta}, t.u.components()};
      };
    }
  }
  return {};
}

ForecastOptions make_options(const RunConfig& cfg, const NoiseBasis&) {
  ForecastOptions o;
  o.convention = cfg.convention;
  o.nform_mode = cfg.nform_mode;
  o.safety_factor = cfg.safety_factor;
  o.stability_constant = cfg.stability_constant;
  if (cfg.model == ModelKind::Advection) {
    o.diffusivity = cfg.diffusivity;
    o.speed = cfg.velocity.norm();
  }
  return o;
}

State model_step(const RunConfig& cfg, const State& state, const NoiseBasis& basis,
                 const BrownianIncrements& increments) {
  const ForecastOptions opt = make_options(cfg, basis);
  if (cfg.model == ModelKind::Tsw) {
    return tsw_to_state(tsw_spde_step(tsw_from_state(state), cfg.tsw, basis, increments, opt));
  }
  return two_step_forecast(state, make_rhs(cfg), basis, increments, opt);
}

std::vector<std::string> default_diagnostics(const RunConfig& cfg) {
  if (cfg.model == ModelKind::Tsw) return {"mass", "energy", "momentum_x", "momentum_y"};
  if (cfg.tensor == TensorClass::MixedPair) return {"integral", "product", "pairing"};
  if (cfg.tensor == TensorClass::OneForm && cfg.dim == 3) return {"l2", "helicity"};
  return {"integral", "l2"};
}

double diagnostic(const RunConfig& cfg, const std::string& name, const State& state) {
  if (cfg.model == ModelKind::Tsw) {
    const TswState s = tsw_from_state(state);
    if (name == "mass" || name == "energy" || name == "momentum_x" || name == "momentum_y") {
      const TswInvariants inv = tsw_invariants(s);
      if (name == "mass") return inv.mass;
      if (name == "energy") return inv.energy;
      return name == "momentum_x" ? inv.momentum(0) : inv.momentum(1);
    }
    if (name == "min_h") return s.h.values().minCoeff();
    if (name == "min_theta") return s.theta.values().minCoeff();
    bad("[run] diagnostics", "the tsw model has no diagnostic '" + name + "'");
  }
  const Variable& v = state.front();
  const ScalarField& f = v.components.front();
  if (name == "integral") return total_integral(f);
  if (name == "l2") {
    double sum = 0.0;
    for (const auto& c : v.components) sum += integrate(c * c);
    return std::sqrt(sum);
  }
  if (name == "max_abs") {
    double m = 0.0;
    for (const auto& c : v.components) m = std::max(m, c.max_abs());
    return m;
  }
  if (v.tensor == TensorClass::MixedPair) {
    if (name == "product") return product_integral(v.components[0], v.components[1], 1);
    if (name == "pairing") return pairing_integral(v.components[0], v.components[1]);
  }
  if (v.tensor == TensorClass::OneForm && name == "helicity" && v.components.size() == 3) {
    return helicity(VectorField(v.components));
  }
  bad("[run] diagnostics", "diagnostic '" + name + "' is not available for this model");
}

std::filesystem::path output_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output;
}

namespace {

std::string member_tag(int member) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "m%03d", member);
  return buf;
}

std::string step_tag(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06d", step);
  return buf;
}

std::string component_name(const Variable& v, std::size_t c) {
  if (v.components.size() == 1) return v.name;
  if (v.tensor == TensorClass::MixedPair) return c == 0 ? "f" : "g";
  return v.name + std::to_string(c);
}

struct MemberOutput {
  std::vector<std::string> files;
  State final_state;
};

MemberOutput run_member(const RunConfig& cfg, const Grid& grid, const NoiseBasis& basis, int member,
                        const std::filesystem::path& dir) {
  MemberOutput out;
  Rng rng(cfg.seed, static_cast<std::uint64_t>(member));
  State state = make_state(cfg, grid);
  std::vector<DiagnosticSeries> series;
  for (const auto& name : cfg.diagnostics) series.emplace_back(name);
  const std::string mtag = member_tag(member);

  auto record = [&](int step) {
    for (auto& s : series) s.push(step * cfg.dt, diagnostic(cfg, s.name(), state));
  };
  auto snapshot = [&](int step) {
    for (const auto& v : state) {
      for (std::size_t c = 0; c < v.components.size(); ++c) {
        const std::string file = component_name(v, c) + "_" + mtag + "_" + step_tag(step) + ".fld";
        write_snapshot(dir / file, v.components[c]);
        out.files.push_back(file);
      }
    }
  };

  record(0);
  if (cfg.snapshot_every > 0) snapshot(0);
  for (int step = 1; step <= cfg.n_steps; ++step) {
    try {
      state = model_step(cfg, state, basis, sample_increments(basis.size(), cfg.dt, rng));
    } catch (const RuntimeAbort& e) {
      throw RuntimeAbort("member " + std::to_string(member) + ", step " + std::to_string(step) + ": " + e.what());
    }
    record(step);
    const bool last = step == cfg.n_steps;
    if ((cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) || last) snapshot(step);
  }
  for (const auto& s : series) {
    const std::string file = s.name() + "_" + mtag + ".csv";
    s.write_csv(dir / file);
    out.files.push_back(file);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace

RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& directory) {
  const Grid grid = make_grid(cfg);
  const NoiseBasis basis = make_basis(cfg, grid);
  std::filesystem::create_directories(directory);

  std::vector<MemberOutput> members(cfg.ensemble);
  std::vector<std::exception_ptr> errors(cfg.ensemble);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int m = next++; m < cfg.ensemble; m = next++) {
      try {
        members[m] = run_member(cfg, grid, basis, m, directory);
      } catch (...) {
        errors[m] = std::current_exception();
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, cfg.ensemble);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunSummary summary;
  summary.directory = directory;
  for (const auto& m : members) summary.files.insert(summary.files.end(), m.files.begin(), m.files.end());

  if (cfg.ensemble > 1) {
    const State& first = members.front().final_state;
    for (std::size_t k = 0; k < first.size(); ++k) {
      for (std::size_t c = 0; c < first[k].components.size(); ++c) {
        ScalarField mean(grid);
        for (const auto& m : members) mean += m.final_state[k].components[c];
        mean *= 1.0 / cfg.ensemble;
        const std::string file = component_name(first[k], c) + "_mean_" + step_tag(cfg.n_steps) + ".fld";
        write_snapshot(directory / file, mean);
        summary.files.push_back(file);
      }
    }
  }
  std::sort(summary.files.begin(), summary.files.end());

  Json manifest = Json::object();
  manifest["software"] = "locpert";
  manifest["version"] = kVersion;
  manifest["command"] = "simulate";
  manifest["seed"] = cfg.seed;
  manifest["rng"] = "mt19937_64, member k seeded with seed_seq(seed, k)";
  manifest["ensemble"] = cfg.ensemble;
  manifest["config"] = cfg.document.to_json();
  manifest["files"] = summary.files;
  std::ofstream out(directory / "manifest.json");
  if (!out) throw RuntimeAbort("cannot write manifest in " + directory.string());
  out << manifest.dump(2) << '\n';
  return summary;
}

StudySetup make_study_setup(const RunConfig& cfg) {
  const Grid grid = make_grid(cfg, cfg.study_points.value_or(cfg.points));
  StudySetup s{.basis = make_basis(cfg, grid)};
  s.convention = cfg.convention;
  s.nform_mode = cfg.nform_mode;
  s.safety_factor = cfg.study_safety_factor;
  s.quadrature_order = cfg.quadrature_order;
  s.seed = cfg.seed;
  if (cfg.model == ModelKind::Tsw) {
    const TswState t = make_tsw_state(cfg, grid);
    s.f = t.h;
    s.g = t.theta;
    s.u = t.u;
    s.tsw = t;
    return s;
  }
  s.f = cfg.f.given ? make_scalar(cfg.f, grid) : ScalarField(grid, 1.0);
  if (cfg.g.given) s.g = make_scalar(cfg.g, grid);
  if (cfg.u.given && cfg.dim >= 2) s.u = make_vector(cfg.u, grid);
  if (cfg.dim == 3 && s.u) {
    s.u3 = s.u;
    s.basis3 = s.basis;
  }
  if (cfg.dim == 2 && (cfg.h.given || cfg.theta.given)) s.tsw = make_tsw_state(cfg, grid);
  return s;
}

StudyResult run_convergence(const RunConfig& cfg, const std::vector<double>& dts) {
  const StudySetup setup = make_study_setup(cfg);
  std::vector<std::string> metrics = cfg.study_metrics;
  if (metrics.empty()) metrics = available_metrics(setup);
  return convergence_study(setup, dts, metrics);
}

}  // namespace locpert
