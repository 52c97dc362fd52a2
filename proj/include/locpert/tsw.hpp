#pragma once

#include <Eigen/Core>

#include "locpert/forecast.hpp"

namespace locpert {

/// Thermal shallow water on a 2D periodic grid.
struct TswState {
  ScalarField h;      // layer height, > 0
  ScalarField theta;  // buoyancy contrast, > 0
  VectorField u;      // horizontal velocity
};

struct TswParams {
  double kappa = 0.0;
  double h0 = 1.0;
  double theta0 = 1.0;
  double fcor = 0.0;
};

struct TswInvariants {
  double energy = 0.0;  // integral of (h |u|^2 + h^2 theta) / 2
  double mass = 0.0;    // integral of h
  Eigen::Vector2d momentum = Eigen::Vector2d::Zero();  // integral of h u
};

TswInvariants tsw_invariants(const TswState& s);

/// Throws PositivityError naming the offending variable and its minimum.
void check_tsw_positivity(const TswState& s);

/// Time derivatives of (h, theta, u):
///   h_t     = -D.(h u)
///   theta_t = -u.D theta - kappa (h theta - h0 theta0)
///   u_t     = -(u.D) u - f z x u - D(h theta) + h D(theta) / 2
TswState tsw_deterministic_rhs(const TswState& s, const TswParams& params);

/// h is an n-form, u a pair of 0-forms and theta an n-vector.
State tsw_to_state(const TswState& s);
TswState tsw_from_state(const State& state);

/// One two-step forecast of the full system.  The gravity wave and flow
/// speeds are added to `options.speed` for the stability check.
TswState tsw_spde_step(const TswState& s, const TswParams& params, const NoiseBasis& basis,
                       const BrownianIncrements& increments, const ForecastOptions& options);
TswState tsw_spde_step(const TswState& s, const TswParams& params, const NoiseBasis& basis, double dt, Rng& rng,
                       const ForecastOptions& options);

/// The perturbation alone (zero deterministic tendency).
TswState tsw_perturbation_step(const TswState& s, const NoiseBasis& basis, const BrownianIncrements& increments,
                               const ForecastOptions& options);

}  // namespace locpert
