#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"
#include "locpert/snapshot.hpp"
#include "support.hpp"

using namespace locpert;
using namespace locpert::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sin_x(const Grid& g, double L) {
  return ScalarField::from_function(g, [&](const Eigen::Vector3d& x) { return std::sin(2.0 * kPi * x(0) / L); });
}

}  // namespace

TEST(Grid, SpacingCoordinatesAndWrap) {
  const Grid g(2, {8, 4, 1}, {2.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.25);
  EXPECT_EQ(g.size(), 32);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 3), 0.75);
  EXPECT_DOUBLE_EQ(g.volume(), 2.0);
  EXPECT_DOUBLE_EQ(g.wrap(0, -0.5), 1.5);
  EXPECT_DOUBLE_EQ(g.wrap(1, 1.25), 0.25);
  EXPECT_NEAR(g.periodic_delta(0, 1.9, 0.1), -0.2, 1e-15);
  const Index n = g.flat({5, 2, 0});
  EXPECT_EQ(g.unflatten(n), (std::array<Index, 3>{5, 2, 0}));
}

TEST(Grid, RejectsInvalidShapes) {
  EXPECT_THROW(Grid(4, {2, 2, 2}, {1, 1, 1}), InvalidArgument);
  EXPECT_THROW(Grid(1, {0, 1, 1}, {1, 1, 1}), InvalidArgument);
  EXPECT_THROW(Grid(1, {4, 1, 1}, {-1, 1, 1}), InvalidArgument);
}

TEST(Derivative, AnnihilatesConstants) {
  const Grid g = Grid::uniform(3, 6);
  const ScalarField c(g, 3.7);
  for (int p = 0; p < 3; ++p) {
    EXPECT_EQ(derivative(c, p).max_abs(), 0.0);
    for (int q = 0; q < 3; ++q) EXPECT_EQ(second_derivative(c, p, q).max_abs(), 0.0);
  }
}

TEST(Derivative, RejectsBadAxis) {
  const Grid g = Grid::uniform(2, 8);
  EXPECT_THROW(derivative(ScalarField(g), 2), InvalidArgument);
  EXPECT_THROW(second_derivative(ScalarField(g), 0, -1), InvalidArgument);
}

TEST(Derivative, SineIsSecondOrderAccurate) {
  const double L = 3.0;
  std::vector<double> errors, hs;
  for (Index n : {16, 32, 64, 128}) {
    const Grid g(1, {n, 1, 1}, {L, 1, 1});
    const ScalarField exact = ScalarField::from_function(
        g, [&](const Eigen::Vector3d& x) { return 2.0 * kPi / L * std::cos(2.0 * kPi * x(0) / L); });
    errors.push_back(max_diff(derivative(sin_x(g, L), 0), exact));
    hs.push_back(g.spacing(0));
  }
  EXPECT_NEAR(loglog_slope(hs, errors), 2.0, 0.05);
}

TEST(Derivative, MatchesFourierSymbolOfTheStencil) {
  const Grid g = Grid::uniform(1, 128);
  const ScalarField f = smooth_random(g, 3, 6);
  const ScalarField oracle = apply_symbol(f, [&](const Eigen::Vector3d& k) { return centered_symbol(g, k, 0); });
  const ScalarField d = derivative(f, 0);
  EXPECT_LT(max_diff(d, oracle) / d.max_abs(), 1e-6);
}

TEST(Derivative, MatchesFourierSymbolIn2D) {
  const Grid g(2, {16, 12, 1}, {2.0 * kPi, 3.0, 1.0});
  const ScalarField f = smooth_random(g, 11, 3);
  for (int p = 0; p < 2; ++p) {
    const ScalarField oracle =
        apply_symbol(f, [&](const Eigen::Vector3d& k) { return centered_symbol(g, k, p); });
    EXPECT_LT(max_diff(derivative(f, p), oracle), 1e-12);
  }
}

TEST(Derivative, SpectralDerivativeDiffersAtSecondOrder) {
  std::vector<double> errors, hs;
  for (Index n : {16, 32, 64}) {
    const Grid g = Grid::uniform(1, n);
    const ScalarField f = smooth_random(g, 5, 3);
    const ScalarField spectral = apply_symbol(f, [](const Eigen::Vector3d& k) { return Complex(0.0, k(0)); });
    errors.push_back(max_diff(derivative(f, 0), spectral));
    hs.push_back(g.spacing(0));
  }
  EXPECT_NEAR(loglog_slope(hs, errors), 2.0, 0.1);
}

TEST(SecondDerivative, SineIsSecondOrderAccurate) {
  const double L = 2.0;
  std::vector<double> errors, hs;
  for (Index n : {16, 32, 64, 128}) {
    const Grid g(1, {n, 1, 1}, {L, 1, 1});
    const ScalarField exact = -std::pow(2.0 * kPi / L, 2) * sin_x(g, L);
    errors.push_back(max_diff(second_derivative(sin_x(g, L), 0, 0), exact));
    hs.push_back(g.spacing(0));
  }
  EXPECT_NEAR(loglog_slope(hs, errors), 2.0, 0.05);
}

TEST(SecondDerivative, MixedIsSymmetricExactly) {
  const Grid g(3, {6, 8, 5}, {1.0, 2.0, 3.0});
  const ScalarField f = smooth_random(g, 17);
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) EXPECT_EQ(max_diff(second_derivative(f, p, q), second_derivative(f, q, p)), 0.0);
  }
}

TEST(SecondDerivative, SummationByPartsHolds) {
  const Grid g = Grid::uniform(2, 24);
  const ScalarField f = smooth_random(g, 1), w = smooth_random(g, 2);
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      EXPECT_NEAR(integrate(w * second_derivative(f, p, q)), -integrate(derivative(w, p) * derivative(f, q)), 1e-12);
    }
  }
}

TEST(Integrate, ExamplesAndTelescoping) {
  for (Index n : {3, 10, 33}) {
    const Grid g(2, {n, n + 1, 1}, {1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(integrate(ScalarField(g, 1.0)), 1.0);
  }
  const Grid g1(1, {40, 1, 1}, {5.0, 1, 1});
  EXPECT_NEAR(integrate(sin_x(g1, 5.0)), 0.0, 1e-14);
  const Grid g = Grid::uniform(3, 8);
  const ScalarField f = smooth_random(g, 4, 3, 1.0);
  EXPECT_NEAR(integrate(f), f.values().mean() * g.volume(), 1e-12);
  for (int p = 0; p < 3; ++p) EXPECT_NEAR(integrate(derivative(f, p)), 0.0, 1e-13);
}

TEST(SampleAt, ReproducesNodesAndConstants) {
  const Grid g(2, {10, 7, 1}, {2.0, 1.5, 1.0});
  const ScalarField f = smooth_random(g, 8);
  const PointSet x = g.node_coordinates();
  const auto v = sample_at(f, x);
  for (Index n = 0; n < g.size(); ++n) EXPECT_EQ(v[n], f[n]);

  PointSet shifted = x;
  shifted.row(0).array() += 2.0 * 3.0;
  shifted.row(1).array() -= 1.5;
  const auto w = sample_at(f, shifted);
  for (Index n = 0; n < g.size(); ++n) EXPECT_NEAR(w[n], f[n], 1e-14);

  PointSet any(2, 3);
  any << 0.13, 1.77, -4.2, 0.9, 0.01, 8.3;
  for (double s : sample_at(ScalarField(g, 2.5), any)) EXPECT_NEAR(s, 2.5, 1e-15);
}

TEST(SampleAt, MidpointsConvergeAtHighOrder) {
  std::vector<double> errors, hs;
  for (Index n : {16, 32, 64, 128}) {
    const Grid g = Grid::uniform(1, n);
    const ScalarField f = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::sin(x(0)); });
    PointSet mid = g.node_coordinates();
    mid.array() += 0.5 * g.spacing(0);
    const auto v = sample_at(f, mid);
    double e = 0.0;
    for (Index k = 0; k < n; ++k) e = std::max(e, std::abs(v[k] - std::sin(mid(0, k))));
    errors.push_back(e);
    hs.push_back(g.spacing(0));
  }
  EXPECT_GT(loglog_slope(hs, errors), 3.8);
}

TEST(DivergenceCurl, ConstantsGiveZero) {
  const Grid g2 = Grid::uniform(2, 8);
  const VectorField c2({ScalarField(g2, 1.5), ScalarField(g2, -2.0)});
  EXPECT_EQ(divergence(c2).max_abs(), 0.0);
  EXPECT_EQ(curl2(c2).max_abs(), 0.0);
  const Grid g3 = Grid::uniform(3, 6);
  const VectorField c3({ScalarField(g3, 1.0), ScalarField(g3, 2.0), ScalarField(g3, 3.0)});
  EXPECT_EQ(curl3(c3).max_norm(), 0.0);
}

TEST(DivergenceCurl, CurlOfRotationField) {
  std::vector<double> errors, hs;
  for (Index n : {16, 32, 64}) {
    const Grid g = Grid::uniform(2, n);
    const VectorField v({ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return -std::sin(x(1)); }),
                         ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::sin(x(0)); })});
    const ScalarField exact =
        ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::cos(x(0)) + std::cos(x(1)); });
    errors.push_back(max_diff(curl2(v), exact));
    hs.push_back(g.spacing(0));
  }
  EXPECT_NEAR(loglog_slope(hs, errors), 2.0, 0.05);
}

TEST(DivergenceCurl, DivergenceOfCurlVanishesAndCurlIsSymmetric) {
  const Grid g(3, {8, 6, 7}, {1.0, 2.0, 3.0});
  const VectorField v = smooth_random_vector(g, 21);
  const VectorField w = smooth_random_vector(g, 22);
  EXPECT_LT(divergence(curl3(v)).max_abs(), 1e-12);
  // Integration by parts: <curl v, curl w> = <v, curl curl w>.
  const VectorField cw = curl3(w);
  EXPECT_NEAR(integrate(dot(curl3(v), cw)), integrate(dot(v, curl3(cw))), 1e-11);
  EXPECT_THROW(curl2(smooth_random_vector(g, 1)), InvalidArgument);
  const Grid g1 = Grid::uniform(1, 8);
  EXPECT_THROW(curl2(VectorField({ScalarField(g1)})), InvalidArgument);
}

TEST(Linearity, OperatorsAreLinear) {
  const Grid g(2, {12, 10, 1}, {1.0, 2.0, 1.0});
  const ScalarField f = smooth_random(g, 31), h = smooth_random(g, 32);
  const double a = 1.7, b = -0.4;
  const ScalarField comb = a * f + b * h;
  for (int p = 0; p < 2; ++p) {
    EXPECT_LT(max_diff(derivative(comb, p), a * derivative(f, p) + b * derivative(h, p)), 1e-12);
    EXPECT_LT(max_diff(second_derivative(comb, p, 1), a * second_derivative(f, p, 1) + b * second_derivative(h, p, 1)),
              1e-11);
  }
  EXPECT_NEAR(integrate(comb), a * integrate(f) + b * integrate(h), 1e-13);
  PointSet x(2, 4);
  x << 0.1, 0.33, 0.5, 0.91, 1.2, 0.4, 1.9, 0.05;
  const auto s = sample_at(comb, x), sf = sample_at(f, x), sh = sample_at(h, x);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s[k], a * sf[k] + b * sh[k], 1e-13);
}

TEST(Snapshot, RoundTripsBitExactly) {
  const Grid g(3, {4, 3, 5}, {2.0 * kPi, 0.1, 7.3});
  const ScalarField f = smooth_random(g, 41);
  std::stringstream buf;
  write_snapshot(buf, f);
  const ScalarField r = read_snapshot(buf);
  EXPECT_TRUE(r.grid() == g);
  EXPECT_EQ(max_diff(r, f), 0.0);
}

TEST(Snapshot, HeaderIsThreeTextLines) {
  const Grid g(2, {3, 2, 1}, {1.0, 2.0, 1.0});
  std::stringstream buf;
  write_snapshot(buf, ScalarField(g, 1.0));
  std::string l1, l2, l3;
  std::getline(buf, l1);
  std::getline(buf, l2);
  std::getline(buf, l3);
  EXPECT_EQ(l1, "2");
  EXPECT_EQ(l2, "3 2");
  EXPECT_EQ(l3, "1 2");
  std::string rest((std::istreambuf_iterator<char>(buf)), std::istreambuf_iterator<char>());
  EXPECT_EQ(rest.size(), 6 * sizeof(double));
}

TEST(Snapshot, RejectsTruncatedInput) {
  std::stringstream buf("2\n3 2\n1 2\nabc");
  EXPECT_THROW(read_snapshot(buf), InvalidArgument);
}
