#include "locpert/forecast.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

void check_stability(const Grid& grid, double dt, const NoiseBasis& basis, const ForecastOptions& options) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  double diffusivity = options.diffusivity;
  if (!basis.empty()) {
    double noise = 0.0;
    for (int p = 0; p < grid.dim(); ++p) noise = std::max(noise, basis.diffusion_tensor(p, p).max_abs());
    diffusivity += 0.5 * noise;
  }
  const double h = grid.min_spacing();
  double limit = std::numeric_limits<double>::infinity();
  if (diffusivity > 0.0) limit = std::min(limit, h * h / diffusivity);
  if (options.speed > 0.0) limit = std::min(limit, h / options.speed);
  limit *= options.stability_constant;
  if (dt > limit) {
    std::ostringstream msg;
    msg << "time step " << dt << " exceeds the explicit stability limit " << limit;
    throw StabilityError(msg.str());
  }
}

std::vector<ScalarField> perturbation_increment(const Variable& v, const DiffeoIncrement& d, NFormMode mode) {
  std::vector<ScalarField> out;
  switch (v.tensor) {
    case TensorClass::ZeroForm:
      for (const auto& c : v.components) out.push_back(perturb_0form(c, d).realized);
      break;
    case TensorClass::NForm:
      for (const auto& c : v.components) out.push_back(perturb_nform(c, d, mode).realized);
      break;
    case TensorClass::VolumeForm: {
      const ScalarField m = perturb_volume_multiplier(d).realized;
      for (const auto& c : v.components) out.push_back(m * c);
      break;
    }
    case TensorClass::NVector: {
      const DiffeoIncrement inv = inverse_increment(d);
      for (const auto& c : v.components) out.push_back(pushforward_nvector(c, inv).realized);
      break;
    }
    case TensorClass::OneForm:
      out = perturb_1form(VectorField(v.components), d).realized.components();
      break;
    case TensorClass::MixedPair: {
      if (v.components.size() != 2) throw InvalidArgument("mixed pair needs exactly two components");
      auto [f, g] = perturb_mixed_pair(v.components[0], v.components[1], d, mode);
      out.push_back(std::move(f.realized));
      out.push_back(std::move(g.realized));
      break;
    }
  }
  return out;
}

State euler_step(const State& state, const Rhs& rhs, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  State next = state;
  if (!rhs) return next;
  const Tendency tend = rhs(state);
  if (tend.size() != state.size()) throw InvalidArgument("tendency does not match the state layout");
  for (std::size_t k = 0; k < next.size(); ++k) {
    if (tend[k].size() != next[k].components.size()) {
      throw InvalidArgument("tendency of " + next[k].name + " has the wrong number of components");
    }
    for (std::size_t c = 0; c < tend[k].size(); ++c) next[k].components[c] += dt * tend[k][c];
  }
  return next;
}

State two_step_forecast(const State& state, const Rhs& rhs, const NoiseBasis& basis,
                        const BrownianIncrements& increments, const ForecastOptions& options) {
  check_stability(basis.grid(), increments.dt, basis, options);
  State next = euler_step(state, rhs, increments.dt);
  if (basis.is_trivial()) return next;
  const DiffeoIncrement d(basis, increments, options.convention, options.safety_factor);
  for (auto& v : next) {
    const auto inc = perturbation_increment(v, d, options.nform_mode);
    for (std::size_t c = 0; c < inc.size(); ++c) v.components[c] += inc[c];
  }
  return next;
}

State two_step_forecast(const State& state, const Rhs& rhs, const NoiseBasis& basis, double dt, Rng& rng,
                        const ForecastOptions& options) {
  return two_step_forecast(state, rhs, basis, sample_increments(basis.size(), dt, rng), options);
}

ScalarField advection_diffusion_rhs(const ScalarField& f, const VectorField& u, double diffusivity) {
  if (diffusivity < 0.0) throw InvalidArgument("diffusivity must be non-negative");
  ScalarField out = -advective_derivative(u, f);
  if (diffusivity > 0.0) {
    for (int p = 0; p < f.grid().dim(); ++p) out.values() += diffusivity * second_derivative(f, p, p).values();
  }
  return out;
}

NoiseBasis lu_basis(const NoiseBasis& basis) { return basis.with_drift(ito_drift_correction(basis, 1.0)); }

NoiseBasis salt_basis(const NoiseBasis& basis) { return basis.with_drift(ito_drift_correction(basis, 0.5)); }

DiffeoIncrement salt_increment(const NoiseBasis& basis, double dt, Rng& rng, double safety_factor) {
  return DiffeoIncrement(salt_basis(basis), sample_increments(basis.size(), dt, rng), Convention::SALT,
                         safety_factor);
}

namespace {

// Hand-assembled pieces of the LU and SALT expressions.  They deliberately
// avoid the cached quantities of NoiseBasis.

// sum_i (e_i . D) e_i^p
ScalarField self_advection_component(const NoiseBasis& b, int p) {
  ScalarField out(b.grid());
  for (int i = 0; i < b.size(); ++i) {
    const ScalarField& ep = b.mode(i)[p];
    for (int q = 0; q < b.grid().dim(); ++q) out += b.mode(i)[q] * derivative(ep, q);
  }
  return out;
}

// 1/2 sum_i e_i^p e_i^q D_p D_q f, summed over all ordered pairs
ScalarField half_hessian(const NoiseBasis& b, const ScalarField& f) {
  const int dim = f.grid().dim();
  ScalarField out(f.grid());
  for (int p = 0; p < dim; ++p) {
    for (int q = 0; q < dim; ++q) {
      const ScalarField dd = second_derivative(f, p, q);
      for (int i = 0; i < b.size(); ++i) out += 0.5 * (b.mode(i)[p] * b.mode(i)[q] * dd);
    }
  }
  return out;
}

double max_gap(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

}  // namespace

double lu_correspondence_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng,
                               double safety_factor) {
  const DiffeoIncrement d(basis, sample_increments(basis.size(), dt, rng), Convention::LU, safety_factor);
  const Grid& g = f.grid();
  const int dim = g.dim();

  ScalarField expected = half_hessian(basis, f);
  for (int p = 0; p < dim; ++p) expected += self_advection_component(basis, p) * derivative(f, p);
  expected *= dt;
  for (int i = 0; i < basis.size(); ++i) {
    ScalarField n(g);
    for (int p = 0; p < dim; ++p) n += basis.mode(i)[p] * derivative(f, p);
    expected += d.eta(i) * n;
  }
  double gap = max_gap(perturb_0form(f, d).realized, expected);

  const PointSet x = g.node_coordinates();
  const PointSet y = inverse_map(d, x);
  for (Index c = 0; c < x.cols(); ++c) {
    for (int p = 0; p < dim; ++p) {
      double target = x(p, c);
      for (int i = 0; i < basis.size(); ++i) target -= basis.mode(i)[p][c] * d.eta(i);
      gap = std::max(gap, std::abs(g.periodic_delta(p, y(p, c), target)));
    }
  }
  return gap;
}

double lu_nform_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng, double safety_factor) {
  const DiffeoIncrement d(basis, sample_increments(basis.size(), dt, rng), Convention::LU, safety_factor);
  const Grid& g = f.grid();
  const int dim = g.dim();

  ScalarField expected(g);
  for (int p = 0; p < dim; ++p) {
    // (D.A)^p = sum_q D_q(e^q e^p) expanded by the product rule
    ScalarField div_a(g);
    for (int i = 0; i < basis.size(); ++i) {
      const VectorField& e = basis.mode(i);
      for (int q = 0; q < dim; ++q) div_a += derivative(e[q], q) * e[p] + e[q] * derivative(e[p], q);
    }
    ScalarField velocity = (0.5 * dt) * div_a;
    for (int i = 0; i < basis.size(); ++i) velocity += d.eta(i) * basis.mode(i)[p];
    ScalarField diffusive(g);
    for (int q = 0; q < dim; ++q) {
      for (int i = 0; i < basis.size(); ++i) {
        diffusive += 0.5 * (basis.mode(i)[p] * basis.mode(i)[q] * derivative(f, q));
      }
    }
    expected += derivative(velocity * f + dt * diffusive, p);
  }
  return max_gap(perturb_nform(f, d, NFormMode::Flux).realized, expected);
}

double salt_correspondence_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng,
                                 double safety_factor) {
  const DiffeoIncrement d = salt_increment(basis, dt, rng, safety_factor);
  const Grid& g = f.grid();
  const int dim = g.dim();

  ScalarField expected = half_hessian(basis, f);
  for (int q = 0; q < dim; ++q) expected += 0.5 * (self_advection_component(basis, q) * derivative(f, q));
  expected *= dt;
  for (int i = 0; i < basis.size(); ++i) {
    ScalarField n(g);
    for (int p = 0; p < dim; ++p) n += basis.mode(i)[p] * derivative(f, p);
    expected -= d.eta(i) * n;
  }
  return max_gap(perturb_0form(f, d).realized, expected);
}

}  // namespace locpert
