#include "locpert/diffeo.hpp"

#include <cmath>
#include <sstream>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

std::string_view to_string(Convention c) {
  switch (c) {
    case Convention::Raw: return "raw";
    case Convention::LU: return "lu";
    case Convention::SALT: return "salt";
  }
  return "?";
}

DiffeoIncrement::DiffeoIncrement(NoiseBasis basis, BrownianIncrements increments, Convention convention,
                                 double safety_factor)
    : DiffeoIncrement(std::move(basis), std::move(increments), convention,
                      convention == Convention::SALT ? -1.0 : 1.0, safety_factor) {}

DiffeoIncrement::DiffeoIncrement(NoiseBasis basis, BrownianIncrements increments, Convention convention,
                                 double noise_sign, double safety_factor)
    : basis_(std::move(basis)),
      increments_(std::move(increments)),
      convention_(convention),
      noise_sign_(noise_sign),
      safety_factor_(safety_factor) {
  if (!(increments_.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (increments_.size() != basis_.size()) {
    throw InvalidArgument("number of Brownian increments does not match the number of noise modes");
  }
  if (!(safety_factor_ > 0.0)) throw InvalidArgument("safety factor must be positive");

  displacement_ = increments_.dt * basis_.drift();
  for (int i = 0; i < basis_.size(); ++i) displacement_ += (noise_sign_ * increments_.eta(i)) * basis_.mode(i);
  max_displacement_ = displacement_.max_norm();

  const double bound = 0.5 * grid().min_spacing() * safety_factor_;
  if (!(max_displacement_ <= bound)) {
    std::ostringstream msg;
    msg << "displacement " << max_displacement_ << " exceeds bound " << bound << " (dt = " << increments_.dt
        << "); reduce the time step or the noise amplitude";
    throw StepSizeError(msg.str());
  }
}

DiffeoIncrement sample_diffeo(const NoiseBasis& basis, double dt, Rng& rng, Convention convention,
                              double safety_factor) {
  return DiffeoIncrement(basis, sample_increments(basis.size(), dt, rng), convention, safety_factor);
}

namespace {

PointSet displace(const Grid& g, const VectorField& disp, const PointSet& points) {
  if (points.rows() != g.dim()) throw InvalidArgument("points must have one row per grid axis");
  PointSet out = points;
  for (int p = 0; p < g.dim(); ++p) {
    out.row(p) += sample_at_vec(disp[p], points).transpose();
    for (Index c = 0; c < out.cols(); ++c) out(p, c) = g.wrap(p, out(p, c));
  }
  return out;
}

VectorField inverse_displacement(const DiffeoIncrement& d) {
  VectorField disp = d.dt() * inverse_drift(d);
  for (int i = 0; i < d.basis().size(); ++i) disp += (-d.noise_sign() * d.eta(i)) * d.basis().mode(i);
  return disp;
}

}  // namespace

PointSet forward_map(const DiffeoIncrement& d, const PointSet& points) {
  return displace(d.grid(), d.displacement(), points);
}

PointSet inverse_map(const DiffeoIncrement& d, const PointSet& points) {
  return displace(d.grid(), inverse_displacement(d), points);
}

VectorField inverse_drift(const DiffeoIncrement& d) {
  return ito_drift_correction(d.basis(), 1.0) - d.basis().drift();
}

DiffeoIncrement inverse_increment(const DiffeoIncrement& d) {
  return DiffeoIncrement(d.basis().with_drift(inverse_drift(d)), d.increments(), Convention::Raw,
                         -d.noise_sign(), d.safety_factor());
}

double composition_residual(const DiffeoIncrement& d) {
  const Grid& g = d.grid();
  const PointSet x = g.node_coordinates();
  const PointSet y = forward_map(d, inverse_map(d, x));
  double sum = 0.0;
  for (Index c = 0; c < x.cols(); ++c) {
    double r2 = 0.0;
    for (int p = 0; p < g.dim(); ++p) {
      const double dp = g.periodic_delta(p, y(p, c), x(p, c));
      r2 += dp * dp;
    }
    sum += r2;
  }
  return x.cols() ? std::sqrt(sum / static_cast<double>(x.cols())) : 0.0;
}

}  // namespace locpert
