#pragma once

#include <vector>

#include "locpert/field.hpp"

namespace locpert {

// Discrete calculus on periodic grids.  Every operator here is linear in its
// field arguments and built from the centered first difference
//   D_p f(k) = (f(k + e_p) - f(k - e_p)) / (2 h_p)
// with periodic wraparound.

/// Values shifted along `axis`: out(k) = f(k + offset * e_axis).
ScalarField roll(const ScalarField& f, int axis, Index offset);

ScalarField derivative(const ScalarField& f, int axis);

/// D_p D_q f.  Mixed derivatives are always evaluated in ascending axis order
/// so swapping (p, q) gives bit-identical results.  For p == q this is the
/// wide (2h) stencil, which keeps summation by parts exact:
///   integrate(g * D_p D_q f) == -integrate(D_p g * D_q f) up to round-off.
ScalarField second_derivative(const ScalarField& f, int axis_p, int axis_q);

/// Mean value times domain volume (the periodic trapezoid rule).
double integrate(const ScalarField& f);

/// Catmull-Rom interpolation per axis at arbitrary points (wrapped
/// periodically).  Reproduces node values exactly.
std::vector<double> sample_at(const ScalarField& f, const PointSet& points);
Eigen::VectorXd sample_at_vec(const ScalarField& f, const PointSet& points);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);

/// 2D scalar curl D_x v - D_y u.
ScalarField curl2(const VectorField& v);

/// 3D vector curl.
VectorField curl3(const VectorField& v);

/// (v . grad) f
ScalarField advective_derivative(const VectorField& v, const ScalarField& f);

}  // namespace locpert
