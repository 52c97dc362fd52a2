#pragma once

#include <string_view>

#include "locpert/noise.hpp"

namespace locpert {

/// Which drift was installed in the basis.  SALT also flips the sign of the
/// noise term: T(x) = x + a dt - sum_i e_i deta_i.
enum class Convention { Raw, LU, SALT };

std::string_view to_string(Convention c);

/// One realized step of the random map
///   T(x) = x + a(x) dt + s * sum_i e_i(x) deta_i,   s = noise_sign().
class DiffeoIncrement {
 public:
  /// Throws StepSizeError when max |a dt + s sum_i e_i deta_i| over the grid
  /// exceeds 0.5 * min spacing * safety_factor.
  DiffeoIncrement(NoiseBasis basis, BrownianIncrements increments, Convention convention = Convention::Raw,
                  double safety_factor = 1.0);

  const NoiseBasis& basis() const { return basis_; }
  const Grid& grid() const { return basis_.grid(); }
  const BrownianIncrements& increments() const { return increments_; }
  double dt() const { return increments_.dt; }
  double eta(int i) const { return increments_.eta(i); }
  Convention convention() const { return convention_; }
  double noise_sign() const { return noise_sign_; }
  double safety_factor() const { return safety_factor_; }

  /// a dt + s sum_i e_i deta_i at the nodes.
  const VectorField& displacement() const { return displacement_; }
  double max_displacement() const { return max_displacement_; }

 private:
  friend DiffeoIncrement inverse_increment(const DiffeoIncrement& d);
  DiffeoIncrement(NoiseBasis basis, BrownianIncrements increments, Convention convention, double noise_sign,
                  double safety_factor);

  NoiseBasis basis_;
  BrownianIncrements increments_;
  Convention convention_;
  double noise_sign_;
  double safety_factor_;
  VectorField displacement_;
  double max_displacement_ = 0.0;
};

/// Samples fresh increments for every mode of `basis` and builds the step.
DiffeoIncrement sample_diffeo(const NoiseBasis& basis, double dt, Rng& rng, Convention convention = Convention::Raw,
                              double safety_factor = 1.0);

/// T(x), wrapped into the domain.  Coefficients are interpolated between nodes.
PointSet forward_map(const DiffeoIncrement& d, const PointSet& points);

/// The closed-form inverse
///   T^{-1}(x) = x + (-a + sum_i (e_i . D) e_i) dt - s * sum_i e_i deta_i.
PointSet inverse_map(const DiffeoIncrement& d, const PointSet& points);

/// -a + sum_i (e_i . D) e_i
VectorField inverse_drift(const DiffeoIncrement& d);

/// The increment whose forward map is inverse_map(d): drift inverse_drift(d),
/// flipped noise sign, same deta, convention Raw.
DiffeoIncrement inverse_increment(const DiffeoIncrement& d);

/// RMS over the nodes of the periodic distance between T(T^{-1}(x)) and x.
double composition_residual(const DiffeoIncrement& d);

}  // namespace locpert
