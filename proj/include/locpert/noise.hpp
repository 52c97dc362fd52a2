#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locpert/field.hpp"

namespace locpert {

/// The drift `a` and noise modes `e_i` that define a random near-identity map
///   T(x) = x + a(x) dt + sum_i e_i(x) deta_i.
///
/// Immutable after construction.  All spatial derivatives of the modes that the
/// perturbation operators consume are computed once here and shared between
/// copies (copies are cheap; `with_drift` only replaces the drift part).
class NoiseBasis {
 public:
  /// Empty basis with zero drift.
  explicit NoiseBasis(const Grid& grid);

  /// Throws InvalidArgument if `divergence_free` is claimed but some mode has
  /// a measurable discrete divergence.
  NoiseBasis(const Grid& grid, std::vector<VectorField> modes, VectorField drift,
             bool divergence_free = false);
  NoiseBasis(const Grid& grid, std::vector<VectorField> modes, bool divergence_free = false);

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(modes_->modes.size()); }
  bool empty() const { return size() == 0; }
  bool divergence_free() const { return modes_->divergence_free; }

  const VectorField& mode(int i) const { return modes_->modes[i]; }
  const VectorField& drift() const { return drift_->drift; }
  bool has_zero_drift() const { return drift_->zero; }

  /// An empty basis with identically zero drift: the map is the identity.
  bool is_trivial() const { return empty() && has_zero_drift(); }

  NoiseBasis with_drift(VectorField drift) const;

  /// D_q e_i^p
  const ScalarField& mode_gradient(int i, int p, int q) const;
  const ScalarField& mode_divergence(int i) const { return modes_->divergence[i]; }
  /// A^{pq} = sum_i e_i^p e_i^q
  const ScalarField& diffusion_tensor(int p, int q) const;
  /// sum_i J_i with J_i = (D_p e_i^p)(D_q e_i^q) - (D_p e_i^q)(D_q e_i^p)
  const ScalarField& jacobian_minor_sum() const { return modes_->jacobian_sum; }
  /// sum_i (e_i . D) e_i
  const VectorField& self_advection() const { return modes_->self_advection; }
  /// sum_i e_i (D . e_i)
  const VectorField& divergence_weighted_modes() const { return modes_->div_weighted; }

  /// D_q a^p
  const ScalarField& drift_gradient(int p, int q) const;
  const ScalarField& drift_divergence() const { return drift_->divergence; }

 private:
  struct ModeData {
    std::vector<VectorField> modes;
    std::vector<std::vector<ScalarField>> gradients;  // [i][p * dim + q]
    std::vector<ScalarField> divergence;
    std::vector<ScalarField> diffusion;  // [p * dim + q]
    ScalarField jacobian_sum;
    VectorField self_advection;
    VectorField div_weighted;
    bool divergence_free = false;
  };
  struct DriftData {
    VectorField drift;
    std::vector<ScalarField> gradients;  // [p * dim + q]
    ScalarField divergence;
    bool zero = true;
  };

  static std::shared_ptr<const ModeData> make_modes(const Grid& grid, std::vector<VectorField> modes,
                                                    bool divergence_free);
  static std::shared_ptr<const DriftData> make_drift(const Grid& grid, VectorField drift);

  Grid grid_;
  std::shared_ptr<const ModeData> modes_;
  std::shared_ptr<const DriftData> drift_;
};

enum class ModePhase { Sin, Cos, Both };

/// One entry of a Fourier noise dictionary.  `wavevector` holds physical
/// wavenumbers, each an integer multiple of 2*pi/extent on its axis.
struct FourierModeSpec {
  Eigen::Vector3d wavevector = Eigen::Vector3d::Zero();
  Eigen::Vector3d amplitude = Eigen::Vector3d::Zero();
  bool solenoidal = false;
  ModePhase phase = ModePhase::Both;
};

/// Real Fourier vector fields amp * sin(k.x) and/or amp * cos(k.x).  A zero
/// wavevector yields a single constant mode.  Solenoidal entries have their
/// amplitude projected orthogonal to k.
std::vector<VectorField> fourier_modes(const Grid& grid, const FourierModeSpec& spec);

/// Basis with one or two modes per entry and zero drift.  The divergence-free
/// flag is set when every entry is solenoidal (or constant).
NoiseBasis build_fourier_basis(const Grid& grid, const std::vector<FourierModeSpec>& specs);

/// Sum of the Fourier fields described by `specs` (used for explicit drifts).
VectorField fourier_vector_field(const Grid& grid, const std::vector<FourierModeSpec>& specs);

/// factor * sum_i (e_i . D) e_i, i.e. component p is factor * e_i^q D_q e_i^p.
/// factor 1 is the drift of the LU map, factor 1/2 the SALT Ito drift.
VectorField ito_drift_correction(const NoiseBasis& basis, double factor);

/// Explicitly seeded generator whose full state round-trips through text.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  double normal();
  std::string state() const;
  void restore(const std::string& state);
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// One draw of the Brownian increments driving the noise modes.
struct BrownianIncrements {
  double dt = 0.0;
  Eigen::VectorXd eta;
  std::string rng_state;  // generator state before the draw

  int size() const { return static_cast<int>(eta.size()); }
};

/// Draws m i.i.d. N(0, dt) increments.  Throws InvalidArgument if dt <= 0.
BrownianIncrements sample_increments(int m, double dt, Rng& rng);

/// Increments fixed by the caller (zero-noise steps, quadrature nodes, ...).
BrownianIncrements fixed_increments(double dt, Eigen::VectorXd eta);

/// A Brownian path sampled at the finest step: steps x m increments.
using BrownianPath = Eigen::MatrixXd;

BrownianPath sample_path(int m, double dt_fine, int steps, Rng& rng);

/// Coarse path whose increments are sums of `factor` consecutive fine ones.
BrownianPath coarsen_path(const BrownianPath& fine, int factor);

}  // namespace locpert
