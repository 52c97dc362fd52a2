#include <cmath>

#include <gtest/gtest.h>

#include "locpert/diffeo.hpp"
#include "locpert/error.hpp"
#include "locpert/noise.hpp"
#include "support.hpp"

using namespace locpert;
using namespace locpert::testing;

namespace {

NoiseBasis constant_basis(const Grid& g, std::vector<Eigen::Vector2d> amps) {
  std::vector<VectorField> modes;
  for (const auto& a : amps) modes.push_back(VectorField({ScalarField(g, a(0)), ScalarField(g, a(1))}));
  return NoiseBasis(g, std::move(modes));
}

NoiseBasis sine_basis(const Grid& g) {
  const VectorField e({ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::sin(x(0)); }),
                       ScalarField(g)});
  return NoiseBasis(g, {e});
}

Eigen::VectorXd eta(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

double max_shift_error(const Grid& g, const PointSet& mapped, const Eigen::Vector2d& shift) {
  const PointSet x = g.node_coordinates();
  double e = 0.0;
  for (Index n = 0; n < x.cols(); ++n) {
    for (int p = 0; p < 2; ++p) e = std::max(e, std::abs(g.periodic_delta(p, mapped(p, n), x(p, n)) - shift(p)));
  }
  return e;
}

}  // namespace

TEST(ForwardMap, ZeroNoiseZeroDriftIsIdentity) {
  const Grid g = Grid::uniform(2, 16);
  const DiffeoIncrement d(sine_basis(g), fixed_increments(0.1, eta({0.0})));
  const PointSet x = g.node_coordinates();
  EXPECT_EQ(forward_map(d, x), x);
  const DiffeoIncrement id(NoiseBasis(g), fixed_increments(0.1, Eigen::VectorXd()));
  EXPECT_EQ(forward_map(id, x), x);
  EXPECT_EQ(inverse_map(id, x), x);
  EXPECT_EQ(composition_residual(id), 0.0);
}

TEST(ForwardMap, ConstantDriftShifts) {
  const Grid g = Grid::uniform(2, 16);
  const NoiseBasis b = NoiseBasis(g).with_drift(VectorField({ScalarField(g, 1.0), ScalarField(g, 0.0)}));
  const DiffeoIncrement d(b, fixed_increments(0.1, Eigen::VectorXd()));
  EXPECT_LT(max_shift_error(g, forward_map(d, g.node_coordinates()), {0.1, 0.0}), 1e-15);
}

TEST(ForwardMap, ConstantModeShifts) {
  const Grid g = Grid::uniform(2, 16);
  const DiffeoIncrement d(constant_basis(g, {{1.0, 0.0}}), fixed_increments(0.01, eta({0.05})));
  EXPECT_LT(max_shift_error(g, forward_map(d, g.node_coordinates()), {0.05, 0.0}), 1e-15);
  EXPECT_LT(max_shift_error(g, inverse_map(d, g.node_coordinates()), {-0.05, 0.0}), 1e-15);
}

TEST(ForwardMap, WrapsIntoTheDomain) {
  const Grid g = Grid::uniform(2, 8);
  const DiffeoIncrement d(constant_basis(g, {{-1.0, 1.0}}), fixed_increments(0.01, eta({0.25})));
  const PointSet y = forward_map(d, g.node_coordinates());
  EXPECT_GE(y.minCoeff(), 0.0);
  EXPECT_LT(y.maxCoeff(), g.extent(0));
}

TEST(ForwardMap, ExcessiveDisplacementIsRejected) {
  const Grid g = Grid::uniform(2, 16);
  const NoiseBasis b = constant_basis(g, {{1.0, 0.0}});
  const double limit = 0.5 * g.min_spacing();
  EXPECT_NO_THROW(DiffeoIncrement(b, fixed_increments(0.01, eta({0.9 * limit}))));
  EXPECT_THROW(DiffeoIncrement(b, fixed_increments(0.01, eta({1.1 * limit}))), StepSizeError);
  EXPECT_NO_THROW(DiffeoIncrement(b, fixed_increments(0.01, eta({1.1 * limit})), Convention::Raw, 2.0));
  EXPECT_THROW(DiffeoIncrement(b, fixed_increments(0.0, eta({0.0}))), InvalidArgument);
  EXPECT_THROW(DiffeoIncrement(b, fixed_increments(0.01, eta({0.0, 0.0}))), InvalidArgument);
}

TEST(InverseMap, ConstantFieldsCloseExactly) {
  const Grid g = Grid::uniform(2, 16);
  const NoiseBasis b = constant_basis(g, {{0.3, -0.2}, {0.1, 0.4}})
                           .with_drift(VectorField({ScalarField(g, 0.2), ScalarField(g, -0.7)}));
  const DiffeoIncrement d(b, fixed_increments(0.01, eta({0.07, -0.05})));
  EXPECT_LT(composition_residual(d), 1e-15);
}

TEST(InverseMap, DriftIsSelfAdvectionMinusDrift) {
  const Grid g = Grid::uniform(2, 24);
  const VectorField a = smooth_random_vector(g, 3);
  const NoiseBasis b = NoiseBasis(g, {smooth_random_vector(g, 4), smooth_random_vector(g, 5)}, a);
  const DiffeoIncrement d(b, fixed_increments(1e-3, eta({0.01, -0.02})), Convention::Raw, 10.0);
  EXPECT_LT(max_diff(inverse_drift(d), ito_drift_correction(b, 1.0) - a), 1e-14);

  const DiffeoIncrement inv = inverse_increment(d);
  EXPECT_EQ(inv.noise_sign(), -d.noise_sign());
  EXPECT_EQ(inv.convention(), Convention::Raw);
  EXPECT_LT((forward_map(inv, g.node_coordinates()) - inverse_map(d, g.node_coordinates())).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(InverseMap, CompositionResidualIsSmallerThanDt) {
  const Grid g = Grid::uniform(2, 128);
  const NoiseBasis b = sine_basis(g);
  const double slope = refinement_slope(study_dts(), [&](double dt) {
    return conditional_mean_rms(b, dt, [](const DiffeoIncrement& d) {
      const Grid& gr = d.grid();
      const PointSet x = gr.node_coordinates();
      const PointSet y = forward_map(d, inverse_map(d, x));
      Eigen::ArrayXd r(x.cols());
      for (Index n = 0; n < x.cols(); ++n) r(n) = gr.periodic_delta(0, y(0, n), x(0, n));
      return r;
    });
  });
  EXPECT_GE(slope, 1.4);
}

TEST(InverseMap, PathwiseResidualIsPositiveForVaryingModes) {
  const Grid g = Grid::uniform(2, 64);
  Rng rng(11);
  const DiffeoIncrement d = sample_diffeo(sine_basis(g), 1e-3, rng, Convention::Raw, 10.0);
  EXPECT_GT(composition_residual(d), 0.0);
}

TEST(Convention, SaltFlipsTheNoiseSign) {
  const Grid g = Grid::uniform(2, 8);
  const NoiseBasis b = constant_basis(g, {{1.0, 0.0}});
  EXPECT_EQ(DiffeoIncrement(b, fixed_increments(0.01, eta({0.1})), Convention::LU).noise_sign(), 1.0);
  const DiffeoIncrement s(b, fixed_increments(0.01, eta({0.1})), Convention::SALT);
  EXPECT_EQ(s.noise_sign(), -1.0);
  EXPECT_LT(max_shift_error(g, forward_map(s, g.node_coordinates()), {-0.1, 0.0}), 1e-15);
  EXPECT_EQ(to_string(Convention::LU), "lu");
}
