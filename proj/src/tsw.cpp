#include "locpert/tsw.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

namespace {

void check_dim(const TswState& s) {
  if (s.h.grid().dim() != 2) throw InvalidArgument("thermal shallow water needs a 2D grid");
  require_same_grid(s.h.grid(), s.theta.grid(), "TSW theta");
  require_same_grid(s.h.grid(), s.u.grid(), "TSW velocity");
}

double wave_speed(const TswState& s) {
  const double gh = (s.h.values() * s.theta.values()).maxCoeff();
  return s.u.max_norm() + std::sqrt(std::max(gh, 0.0));
}

ForecastOptions with_tsw_speed(const TswState& s, ForecastOptions options) {
  options.speed = std::max(options.speed, wave_speed(s));
  return options;
}

TswState finish(State next) {
  TswState out = tsw_from_state(next);
  check_tsw_positivity(out);
  return out;
}

}  // namespace

TswInvariants tsw_invariants(const TswState& s) {
  check_dim(s);
  TswInvariants inv;
  const Eigen::ArrayXd& h = s.h.values();
  const Eigen::ArrayXd speed2 = s.u[0].values().square() + s.u[1].values().square();
  inv.energy = integrate(ScalarField(s.h.grid(), 0.5 * (h * speed2 + h.square() * s.theta.values())));
  inv.mass = integrate(s.h);
  inv.momentum(0) = integrate(s.h * s.u[0]);
  inv.momentum(1) = integrate(s.h * s.u[1]);
  return inv;
}

void check_tsw_positivity(const TswState& s) {
  auto check = [](const ScalarField& f, const char* name) {
    const double lo = f.values().minCoeff();
    if (!(lo > 0.0) || !f.all_finite()) {
      std::ostringstream msg;
      msg << name << " lost positivity (minimum " << lo << ")";
      throw PositivityError(msg.str());
    }
  };
  check(s.h, "h");
  check(s.theta, "theta");
}

TswState tsw_deterministic_rhs(const TswState& s, const TswParams& params) {
  check_dim(s);
  const Grid& g = s.h.grid();
  TswState out{ScalarField(g), ScalarField(g), VectorField(g)};

  for (int p = 0; p < 2; ++p) out.h -= derivative(s.h * s.u[p], p);

  out.theta = -advective_derivative(s.u, s.theta);
  out.theta.values() -= params.kappa * (s.h.values() * s.theta.values() - params.h0 * params.theta0);

  const ScalarField pressure = s.h * s.theta;
  for (int j = 0; j < 2; ++j) {
    out.u[j] = -advective_derivative(s.u, s.u[j]);
    out.u[j] -= derivative(pressure, j);
    out.u[j] += 0.5 * (s.h * derivative(s.theta, j));
  }
  // z x u = (-u_y, u_x)
  out.u[0] += params.fcor * s.u[1];
  out.u[1] -= params.fcor * s.u[0];
  return out;
}

State tsw_to_state(const TswState& s) {
  check_dim(s);
  return {Variable{"h", TensorClass::NForm, {s.h}}, Variable{"theta", TensorClass::NVector, {s.theta}},
          Variable{"u", TensorClass::ZeroForm, s.u.components()}};
}

TswState tsw_from_state(const State& state) {
  if (state.size() != 3 || state[0].components.size() != 1 || state[1].components.size() != 1 ||
      state[2].components.size() != 2) {
    throw InvalidArgument("state does not have the thermal shallow water layout");
  }
  return {state[0].components[0], state[1].components[0], VectorField(state[2].components)};
}

TswState tsw_spde_step(const TswState& s, const TswParams& params, const NoiseBasis& basis,
                       const BrownianIncrements& increments, const ForecastOptions& options) {
  check_tsw_positivity(s);
  const Rhs rhs = [&params](const State& st) {
    const TswState t = tsw_deterministic_rhs(tsw_from_state(st), params);
    return Tendency{{t.h}, {t.theta}, t.u.components()};
  };
  return finish(two_step_forecast(tsw_to_state(s), rhs, basis, increments, with_tsw_speed(s, options)));
}

TswState tsw_spde_step(const TswState& s, const TswParams& params, const NoiseBasis& basis, double dt, Rng& rng,
                       const ForecastOptions& options) {
  return tsw_spde_step(s, params, basis, sample_increments(basis.size(), dt, rng), options);
}

TswState tsw_perturbation_step(const TswState& s, const NoiseBasis& basis, const BrownianIncrements& increments,
                               const ForecastOptions& options) {
  check_tsw_positivity(s);
  return finish(two_step_forecast(tsw_to_state(s), Rhs{}, basis, increments, options));
}

}  // namespace locpert
