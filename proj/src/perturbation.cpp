#include "locpert/perturbation.hpp"

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

ScalarPerturbation assemble(ScalarField drift_part, std::vector<ScalarField> noise_parts, const DiffeoIncrement& d) {
  ScalarPerturbation r;
  r.realized = d.dt() * drift_part;
  for (std::size_t i = 0; i < noise_parts.size(); ++i) {
    r.realized.values() += d.eta(static_cast<int>(i)) * noise_parts[i].values();
  }
  r.drift_part = std::move(drift_part);
  r.noise_parts = std::move(noise_parts);
  return r;
}

VectorPerturbation assemble(VectorField drift_part, std::vector<VectorField> noise_parts, const DiffeoIncrement& d) {
  VectorPerturbation r;
  r.realized = d.dt() * drift_part;
  for (std::size_t i = 0; i < noise_parts.size(); ++i) {
    for (int j = 0; j < r.realized.dim(); ++j) {
      r.realized[j].values() += d.eta(static_cast<int>(i)) * noise_parts[i][j].values();
    }
  }
  r.drift_part = std::move(drift_part);
  r.noise_parts = std::move(noise_parts);
  return r;
}

ScalarField noise_diffusion(const NoiseBasis& basis, const ScalarField& f) {
  const int dim = f.grid().dim();
  ScalarField out(f.grid());
  if (basis.empty()) return out;
  for (int p = 0; p < dim; ++p) {
    for (int q = p; q < dim; ++q) {
      const double w = p == q ? 0.5 : 1.0;
      out.values() += w * basis.diffusion_tensor(p, q).values() * second_derivative(f, p, q).values();
    }
  }
  return out;
}

namespace {

ScalarField dot_gradient(const VectorField& v, const VectorField& grad) {
  ScalarField out(v.grid());
  for (int p = 0; p < v.dim(); ++p) out.values() += v[p].values() * grad[p].values();
  return out;
}

ScalarField volume_drift(const NoiseBasis& basis) {
  return basis.drift_divergence() + 0.5 * basis.jacobian_minor_sum();
}

}  // namespace

ScalarPerturbation perturb_0form(const ScalarField& f, const DiffeoIncrement& d) {
  const NoiseBasis& b = d.basis();
  require_same_grid(f.grid(), b.grid(), "0-form perturbation");
  const VectorField df = gradient(f);
  ScalarField drift = dot_gradient(b.drift(), df) + noise_diffusion(b, f);
  std::vector<ScalarField> noise;
  for (int i = 0; i < b.size(); ++i) noise.push_back(d.noise_sign() * dot_gradient(b.mode(i), df));
  return assemble(std::move(drift), std::move(noise), d);
}

ScalarPerturbation perturb_nform(const ScalarField& f, const DiffeoIncrement& d, NFormMode mode) {
  const NoiseBasis& b = d.basis();
  require_same_grid(f.grid(), b.grid(), "n-form perturbation");
  const int dim = f.grid().dim();
  std::vector<ScalarField> noise;

  if (mode == NFormMode::Pointwise) {
    const VectorField df = gradient(f);
    ScalarField drift = volume_drift(b) * f + dot_gradient(b.drift() + b.divergence_weighted_modes(), df) +
                        noise_diffusion(b, f);
    for (int i = 0; i < b.size(); ++i) {
      noise.push_back(d.noise_sign() * (b.mode_divergence(i) * f + dot_gradient(b.mode(i), df)));
    }
    return assemble(std::move(drift), std::move(noise), d);
  }

  const VectorField df = gradient(f);
  const VectorField velocity = b.drift() - 0.5 * b.self_advection() + 0.5 * b.divergence_weighted_modes();
  ScalarField drift(f.grid());
  for (int p = 0; p < dim; ++p) {
    ScalarField flux = velocity[p] * f;
    if (!b.empty()) {
      for (int q = 0; q < dim; ++q) flux.values() += 0.5 * b.diffusion_tensor(p, q).values() * df[q].values();
    }
    drift += derivative(flux, p);
  }
  for (int i = 0; i < b.size(); ++i) {
    ScalarField n(f.grid());
    for (int p = 0; p < dim; ++p) n += derivative(b.mode(i)[p] * f, p);
    noise.push_back(d.noise_sign() * n);
  }
  return assemble(std::move(drift), std::move(noise), d);
}

ScalarPerturbation perturb_volume_multiplier(const DiffeoIncrement& d) {
  const NoiseBasis& b = d.basis();
  std::vector<ScalarField> noise;
  for (int i = 0; i < b.size(); ++i) noise.push_back(d.noise_sign() * b.mode_divergence(i));
  return assemble(volume_drift(b), std::move(noise), d);
}

VectorPerturbation perturb_1form(const VectorField& v, const DiffeoIncrement& d) {
  const NoiseBasis& b = d.basis();
  require_same_grid(v.grid(), b.grid(), "1-form perturbation");
  const int dim = v.dim();
  if (dim < 2) throw InvalidArgument("1-form perturbation needs dim >= 2");

  std::vector<VectorField> grads;
  for (int j = 0; j < dim; ++j) grads.push_back(gradient(v[j]));

  VectorField drift(v.grid());
  for (int j = 0; j < dim; ++j) {
    drift[j] = dot_gradient(b.drift(), grads[j]) + noise_diffusion(b, v[j]);
    for (int p = 0; p < dim; ++p) drift[j].values() += b.drift_gradient(p, j).values() * v[p].values();
  }

  std::vector<VectorField> noise;
  for (int i = 0; i < b.size(); ++i) {
    const VectorField& e = b.mode(i);
    // (e_i . D) f^p for every component p
    std::vector<ScalarField> adv;
    for (int p = 0; p < dim; ++p) adv.push_back(dot_gradient(e, grads[p]));
    VectorField n(v.grid());
    for (int j = 0; j < dim; ++j) {
      n[j] = adv[j];
      for (int p = 0; p < dim; ++p) {
        const Eigen::ArrayXd& dje = b.mode_gradient(i, p, j).values();
        n[j].values() += dje * v[p].values();
        drift[j].values() += dje * adv[p].values();
      }
    }
    noise.push_back(d.noise_sign() * n);
  }
  return assemble(std::move(drift), std::move(noise), d);
}

ScalarPerturbation pushforward_nvector(const ScalarField& g, const DiffeoIncrement& d) {
  const NoiseBasis& b = d.basis();
  require_same_grid(g.grid(), b.grid(), "n-vector push-forward");
  const VectorField dg = gradient(g);
  const VectorField velocity = b.self_advection() - b.drift() - b.divergence_weighted_modes();
  ScalarField drift = volume_drift(b) * g + dot_gradient(velocity, dg) + noise_diffusion(b, g);
  std::vector<ScalarField> noise;
  for (int i = 0; i < b.size(); ++i) {
    noise.push_back(d.noise_sign() * (b.mode_divergence(i) * g - dot_gradient(b.mode(i), dg)));
  }
  return assemble(std::move(drift), std::move(noise), d);
}

std::pair<ScalarPerturbation, ScalarPerturbation> perturb_mixed_pair(const ScalarField& f_nform,
                                                                     const ScalarField& g_nvector,
                                                                     const DiffeoIncrement& d, NFormMode mode) {
  require_same_grid(f_nform.grid(), g_nvector.grid(), "mixed pair");
  return {perturb_nform(f_nform, d, mode), pushforward_nvector(g_nvector, inverse_increment(d))};
}

}  // namespace locpert
