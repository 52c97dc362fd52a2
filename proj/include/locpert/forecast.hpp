#pragma once

#include <functional>
#include <string>
#include <vector>

#include "locpert/perturbation.hpp"

namespace locpert {

/// One state variable and the tensor class that decides how it is perturbed.
/// Scalar classes (ZeroForm, NForm, NVector, VolumeForm) perturb every
/// component independently; OneForm components form one covector field;
/// MixedPair holds exactly (n-form, n-vector).
struct Variable {
  std::string name;
  TensorClass tensor = TensorClass::ZeroForm;
  std::vector<ScalarField> components;
};

using State = std::vector<Variable>;

/// Time derivatives, one entry per variable, matching the components.
using Tendency = std::vector<std::vector<ScalarField>>;
using Rhs = std::function<Tendency(const State&)>;

struct ForecastOptions {
  Convention convention = Convention::Raw;
  NFormMode nform_mode = NFormMode::Flux;
  double safety_factor = 1.0;
  // Explicit stability bound dt <= c * min(h^2 / diffusivity, h / speed).
  // The noise diffusivity max_p A^{pp} / 2 is added to `diffusivity`.
  double diffusivity = 0.0;
  double speed = 0.0;
  double stability_constant = 0.25;
};

/// Throws StabilityError if dt violates the explicit bound.
void check_stability(const Grid& grid, double dt, const NoiseBasis& basis, const ForecastOptions& options);

/// Realized increment T*theta - theta of one variable.  N-vectors (alone or in
/// a mixed pair) are pushed forward by T^{-1}, everything else is pulled back
/// by T.
std::vector<ScalarField> perturbation_increment(const Variable& v, const DiffeoIncrement& d, NFormMode mode);

/// theta + dt * rhs(theta).  An empty `rhs` means zero tendency.
State euler_step(const State& state, const Rhs& rhs, double dt);

/// Deterministic Euler step followed by the tensor-class perturbation of
/// the result, with one increment shared by all variables.  A trivial basis
/// (no modes, zero drift) leaves the Euler step untouched.
State two_step_forecast(const State& state, const Rhs& rhs, const NoiseBasis& basis,
                        const BrownianIncrements& increments, const ForecastOptions& options);
State two_step_forecast(const State& state, const Rhs& rhs, const NoiseBasis& basis, double dt, Rng& rng,
                        const ForecastOptions& options);

/// -u.Df + D lap f.  Throws InvalidArgument for negative diffusivity.
ScalarField advection_diffusion_rhs(const ScalarField& f, const VectorField& u, double diffusivity);

/// basis with the LU drift a = sum_i (e_i . D) e_i installed.
NoiseBasis lu_basis(const NoiseBasis& basis);

/// basis with the SALT drift a = 1/2 sum_i (e_i . D) e_i installed.
NoiseBasis salt_basis(const NoiseBasis& basis);

/// A SALT step: SALT drift installed and the noise sign flipped.
DiffeoIncrement salt_increment(const NoiseBasis& basis, double dt, Rng& rng, double safety_factor = 1.0);

/// Max-norm gap between perturb_0form under the drift installed in `basis`
/// (convention LU) and the independently assembled LU increment
///   (e_i^q D_q e_i^p D_p f + 1/2 e_i^p e_i^q D_p D_q f) dt + e_i^p D_p f deta_i,
/// together with the gap between inverse_map and x - sum_i e_i deta_i.
double lu_correspondence_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng,
                               double safety_factor = 1.0);

/// Max-norm gap between the flux-form n-form increment under the installed
/// drift and the LU transport form
///   D_p[(1/2 (D.A)^p dt + sum_i e_i^p deta_i) f] + D_p(1/2 A^{pq} D_q f) dt.
double lu_nform_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng,
                      double safety_factor = 1.0);

/// Max-norm gap between perturb_0form under salt_increment(basis) (the
/// installed drift is replaced) and the Ito
/// form of the Stratonovich transport -(e_i o deta_i).Df:
///   -e_i.Df deta_i + 1/2 (e_i^p D_p e_i^q D_q f + e_i^p e_i^q D_p D_q f) dt.
double salt_correspondence_check(const NoiseBasis& basis, const ScalarField& f, double dt, Rng& rng,
                                 double safety_factor = 1.0);

}  // namespace locpert
