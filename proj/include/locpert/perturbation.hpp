#pragma once

#include <utility>
#include <vector>

#include "locpert/diffeo.hpp"

namespace locpert {

/// T* theta = theta + M(theta) dt + sum_i N_i(theta) deta_i, split into its
/// coefficients.  `realized` is the increment for the step's dt and deta.
template <class F>
struct PerturbationResult {
  F drift_part;
  std::vector<F> noise_parts;
  F realized;
};

using ScalarPerturbation = PerturbationResult<ScalarField>;
using VectorPerturbation = PerturbationResult<VectorField>;

/// Fills `realized` = drift_part * dt + sum_i noise_parts[i] * deta_i.
ScalarPerturbation assemble(ScalarField drift_part, std::vector<ScalarField> noise_parts, const DiffeoIncrement& d);
VectorPerturbation assemble(VectorField drift_part, std::vector<VectorField> noise_parts, const DiffeoIncrement& d);

enum class NFormMode { Pointwise, Flux };

/// Pull-back of a function f:
///   M = a.Df + 1/2 A:DDf,   N_i = s e_i.Df
/// where A^{pq} = sum_i e_i^p e_i^q and s is the noise sign of `d`.
ScalarPerturbation perturb_0form(const ScalarField& f, const DiffeoIncrement& d);

/// Pull-back of a density f dx^1...dx^n.
///
/// Pointwise:
///   M = (D.a + 1/2 sum_i J_i) f + (a + sum_i e_i D.e_i).Df + 1/2 A:DDf
///   N_i = s (D.e_i f + e_i.Df)
/// Flux, the same continuum increment written as differences of fluxes:
///   M = D_p[(a^p - 1/2 sum_i (e_i.D e_i^p - e_i^p D.e_i)) f + 1/2 A^{pq} D_q f]
///   N_i = s D_p(e_i^p f)
/// so the integral of the realized increment vanishes to round-off.
ScalarPerturbation perturb_nform(const ScalarField& f, const DiffeoIncrement& d,
                                 NFormMode mode = NFormMode::Flux);

/// Multiplier on dx^1...dx^n:  M = D.a + 1/2 sum_i J_i,  N_i = s D.e_i.
ScalarPerturbation perturb_volume_multiplier(const DiffeoIncrement& d);

/// Pull-back of f_j dx^j, per component j:
///   M^j = a.Df^j + 1/2 A:DDf^j + D_j a^p f^p + sum_i D_j e_i^p (e_i.D) f^p
///   N_i^j = s (e_i.Df^j + D_j e_i^p f^p)
/// Requires dim >= 2.
VectorPerturbation perturb_1form(const VectorField& v, const DiffeoIncrement& d);

/// Push-forward of an n-vector density g by the map of `d`:
///   M = (D.a + 1/2 sum_i J_i) g + (-(a + sum_i e_i D.e_i) + sum_i (e_i.D) e_i).Dg + 1/2 A:DDg
///   N_i = s (D.e_i g - e_i.Dg)
ScalarPerturbation pushforward_nvector(const ScalarField& g, const DiffeoIncrement& d);

/// Pairs an n-form with an n-vector under one increment: the n-form is pulled
/// back by T and the n-vector pushed forward by T^{-1}, i.e.
/// pushforward_nvector(g, inverse_increment(d)).
std::pair<ScalarPerturbation, ScalarPerturbation> perturb_mixed_pair(const ScalarField& f_nform,
                                                                     const ScalarField& g_nvector,
                                                                     const DiffeoIncrement& d,
                                                                     NFormMode mode = NFormMode::Flux);

/// 1/2 A:DDf with A^{pq} = sum_i e_i^p e_i^q.
ScalarField noise_diffusion(const NoiseBasis& basis, const ScalarField& f);

}  // namespace locpert
