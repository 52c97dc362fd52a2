#include "locpert/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

std::shared_ptr<const NoiseBasis::ModeData> NoiseBasis::make_modes(const Grid& grid,
                                                                   std::vector<VectorField> modes,
                                                                   bool divergence_free) {
  const int dim = grid.dim();
  auto data = std::make_shared<ModeData>();
  for (const auto& e : modes) {
    require_same_grid(grid, e.grid(), "noise mode");
    if (e.dim() != dim) throw InvalidArgument("noise mode has wrong number of components");
  }
  data->modes = std::move(modes);
  data->divergence_free = divergence_free;
  data->jacobian_sum = ScalarField(grid);
  data->self_advection = VectorField(grid);
  data->div_weighted = VectorField(grid);
  data->diffusion.assign(dim * dim, ScalarField(grid));

  for (const auto& e : data->modes) {
    std::vector<ScalarField> g;
    g.reserve(dim * dim);
    for (int p = 0; p < dim; ++p) {
      for (int q = 0; q < dim; ++q) g.push_back(derivative(e[p], q));
    }
    ScalarField div(grid);
    for (int p = 0; p < dim; ++p) div += g[p * dim + p];

    if (divergence_free) {
      const double scale = std::max(1.0, e.max_norm() / grid.min_spacing());
      if (div.max_abs() > 1e-12 * scale) {
        throw InvalidArgument("noise basis flagged divergence-free but a mode has divergence " +
                              std::to_string(div.max_abs()));
      }
    }

    Eigen::ArrayXd cross = Eigen::ArrayXd::Zero(grid.size());
    for (int p = 0; p < dim; ++p) {
      for (int q = 0; q < dim; ++q) cross += g[p * dim + q].values() * g[q * dim + p].values();
    }
    data->jacobian_sum.values() += div.values().square() - cross;

    for (int p = 0; p < dim; ++p) {
      for (int q = 0; q < dim; ++q) {
        data->diffusion[p * dim + q].values() += e[p].values() * e[q].values();
        data->self_advection[p].values() += e[q].values() * g[p * dim + q].values();
      }
      data->div_weighted[p].values() += e[p].values() * div.values();
    }

    data->gradients.push_back(std::move(g));
    data->divergence.push_back(std::move(div));
  }
  return data;
}

std::shared_ptr<const NoiseBasis::DriftData> NoiseBasis::make_drift(const Grid& grid, VectorField drift) {
  require_same_grid(grid, drift.grid(), "drift");
  const int dim = grid.dim();
  if (drift.dim() != dim) throw InvalidArgument("drift has wrong number of components");
  auto data = std::make_shared<DriftData>();
  data->zero = true;
  for (int p = 0; p < dim; ++p) {
    if ((drift[p].values() != 0.0).any()) data->zero = false;
  }
  data->divergence = ScalarField(grid);
  for (int p = 0; p < dim; ++p) {
    for (int q = 0; q < dim; ++q) data->gradients.push_back(derivative(drift[p], q));
    data->divergence += data->gradients[p * dim + p];
  }
  data->drift = std::move(drift);
  return data;
}

NoiseBasis::NoiseBasis(const Grid& grid)
    : grid_(grid), modes_(make_modes(grid, {}, true)), drift_(make_drift(grid, VectorField(grid))) {}

NoiseBasis::NoiseBasis(const Grid& grid, std::vector<VectorField> modes, VectorField drift,
                       bool divergence_free)
    : grid_(grid),
      modes_(make_modes(grid, std::move(modes), divergence_free)),
      drift_(make_drift(grid, std::move(drift))) {}

NoiseBasis::NoiseBasis(const Grid& grid, std::vector<VectorField> modes, bool divergence_free)
    : NoiseBasis(grid, std::move(modes), VectorField(grid), divergence_free) {}

NoiseBasis NoiseBasis::with_drift(VectorField drift) const {
  NoiseBasis out = *this;
  out.drift_ = make_drift(grid_, std::move(drift));
  return out;
}

const ScalarField& NoiseBasis::mode_gradient(int i, int p, int q) const {
  grid_.check_axis(p);
  grid_.check_axis(q);
  return modes_->gradients.at(i)[p * grid_.dim() + q];
}

const ScalarField& NoiseBasis::diffusion_tensor(int p, int q) const {
  grid_.check_axis(p);
  grid_.check_axis(q);
  return modes_->diffusion[p * grid_.dim() + q];
}

const ScalarField& NoiseBasis::drift_gradient(int p, int q) const {
  grid_.check_axis(p);
  grid_.check_axis(q);
  return drift_->gradients[p * grid_.dim() + q];
}

namespace {

void check_commensurate(const Grid& grid, const Eigen::Vector3d& k) {
  for (int p = 0; p < 3; ++p) {
    if (p >= grid.dim()) {
      if (k(p) != 0.0) throw InvalidArgument("wavevector has components beyond the grid dimension");
      continue;
    }
    const double n = k(p) * grid.extent(p) / (2.0 * std::numbers::pi);
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, std::abs(n))) {
      throw InvalidArgument("wavevector component " + std::to_string(k(p)) +
                            " is not a multiple of 2*pi/extent on axis " + std::to_string(p));
    }
  }
}

ScalarField phase_field(const Grid& grid, const Eigen::Vector3d& k, bool cosine) {
  return ScalarField::from_function(grid, [&](const Eigen::Vector3d& x) {
    const double arg = k.dot(x);
    return cosine ? std::cos(arg) : std::sin(arg);
  });
}

}  // namespace

std::vector<VectorField> fourier_modes(const Grid& grid, const FourierModeSpec& spec) {
  check_commensurate(grid, spec.wavevector);
  const int dim = grid.dim();
  for (int p = dim; p < 3; ++p) {
    if (spec.amplitude(p) != 0.0) throw InvalidArgument("amplitude has components beyond the grid dimension");
  }

  Eigen::Vector3d amp = spec.amplitude;
  const Eigen::Vector3d& k = spec.wavevector;
  if (k.isZero()) {
    std::vector<ScalarField> c;
    for (int p = 0; p < dim; ++p) c.emplace_back(grid, amp(p));
    return {VectorField(std::move(c))};
  }

  if (spec.solenoidal) {
    // Project against the symbol of the centered difference so the discrete
    // divergence vanishes, not only the continuum one.
    Eigen::Vector3d ks = Eigen::Vector3d::Zero();
    for (int p = 0; p < dim; ++p) ks(p) = std::sin(k(p) * grid.spacing(p)) / grid.spacing(p);
    if (ks.squaredNorm() > 0.0) amp -= ks * (ks.dot(amp) / ks.squaredNorm());
  }

  std::vector<VectorField> out;
  auto make = [&](bool cosine) {
    const ScalarField s = phase_field(grid, k, cosine);
    std::vector<ScalarField> c;
    for (int p = 0; p < dim; ++p) c.push_back(amp(p) * s);
    out.emplace_back(std::move(c));
  };
  if (spec.phase != ModePhase::Cos) make(false);
  if (spec.phase != ModePhase::Sin) make(true);
  return out;
}

NoiseBasis build_fourier_basis(const Grid& grid, const std::vector<FourierModeSpec>& specs) {
  std::vector<VectorField> modes;
  bool solenoidal = true;
  for (const auto& s : specs) {
    if (!s.solenoidal && !s.wavevector.isZero()) solenoidal = false;
    for (auto& m : fourier_modes(grid, s)) modes.push_back(std::move(m));
  }
  return NoiseBasis(grid, std::move(modes), solenoidal);
}

VectorField fourier_vector_field(const Grid& grid, const std::vector<FourierModeSpec>& specs) {
  VectorField out(grid);
  for (const auto& s : specs) {
    for (const auto& m : fourier_modes(grid, s)) out += m;
  }
  return out;
}

VectorField ito_drift_correction(const NoiseBasis& basis, double factor) {
  return factor * basis.self_advection();
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (!in) throw InvalidArgument("malformed generator state");
}

BrownianIncrements sample_increments(int m, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (m < 0) throw InvalidArgument("number of modes must be non-negative");
  BrownianIncrements out;
  out.dt = dt;
  out.rng_state = rng.state();
  out.eta.resize(m);
  const double sd = std::sqrt(dt);
  for (int i = 0; i < m; ++i) out.eta(i) = sd * rng.normal();
  return out;
}

BrownianIncrements fixed_increments(double dt, Eigen::VectorXd eta) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  BrownianIncrements out;
  out.dt = dt;
  out.eta = std::move(eta);
  return out;
}

BrownianPath sample_path(int m, double dt_fine, int steps, Rng& rng) {
  if (!(dt_fine > 0.0)) throw InvalidArgument("time step must be positive");
  BrownianPath path(steps, m);
  const double sd = std::sqrt(dt_fine);
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < m; ++i) path(s, i) = sd * rng.normal();
  }
  return path;
}

BrownianPath coarsen_path(const BrownianPath& fine, int factor) {
  if (factor < 1 || fine.rows() % factor != 0) {
    throw InvalidArgument("coarsening factor must divide the number of fine steps");
  }
  BrownianPath coarse = BrownianPath::Zero(fine.rows() / factor, fine.cols());
  for (Index s = 0; s < fine.rows(); ++s) coarse.row(s / factor) += fine.row(s);
  return coarse;
}

}  // namespace locpert
