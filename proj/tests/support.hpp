#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "locpert/calculus.hpp"
#include "locpert/diffeo.hpp"
#include "locpert/quadrature.hpp"

namespace locpert::testing {

using Complex = std::complex<double>;

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  return (a.values() - b.values()).abs().maxCoeff();
}

inline double max_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int p = 0; p < a.dim(); ++p) m = std::max(m, max_diff(a[p], b[p]));
  return m;
}

inline double rms(const Eigen::ArrayXd& x) { return std::sqrt(x.square().mean()); }

// Naive multidimensional DFT over the grid: X(k) = sum_n x(n) exp(-2 pi i k.n / N).
inline std::vector<Complex> dft(const ScalarField& f, bool inverse_sign = false) {
  const Grid& g = f.grid();
  const double sign = inverse_sign ? 1.0 : -1.0;
  std::vector<Complex> out(g.size());
  for (Index a = 0; a < g.size(); ++a) {
    const auto ka = g.unflatten(a);
    Complex s = 0.0;
    for (Index b = 0; b < g.size(); ++b) {
      const auto nb = g.unflatten(b);
      double phase = 0.0;
      for (int p = 0; p < 3; ++p) phase += static_cast<double>(ka[p] * nb[p]) / static_cast<double>(g.points(p));
      s += f[b] * std::polar(1.0, sign * 2.0 * std::numbers::pi * phase);
    }
    out[a] = s;
  }
  return out;
}

// Applies a Fourier multiplier symbol(kphys) to f and returns the real part.
inline ScalarField apply_symbol(const ScalarField& f, const std::function<Complex(const Eigen::Vector3d&)>& symbol) {
  const Grid& g = f.grid();
  std::vector<Complex> fh = dft(f);
  for (Index a = 0; a < g.size(); ++a) {
    const auto ka = g.unflatten(a);
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    for (int p = 0; p < g.dim(); ++p) {
      Index m = ka[p];
      if (2 * m > g.points(p)) m -= g.points(p);
      k(p) = 2.0 * std::numbers::pi * static_cast<double>(m) / g.extent(p);
    }
    fh[a] *= symbol(k);
  }
  ScalarField out(g);
  for (Index b = 0; b < g.size(); ++b) {
    const auto nb = g.unflatten(b);
    Complex s = 0.0;
    for (Index a = 0; a < g.size(); ++a) {
      const auto ka = g.unflatten(a);
      double phase = 0.0;
      for (int p = 0; p < 3; ++p) phase += static_cast<double>(ka[p] * nb[p]) / static_cast<double>(g.points(p));
      s += fh[a] * std::polar(1.0, 2.0 * std::numbers::pi * phase);
    }
    out[b] = s.real() / static_cast<double>(g.size());
  }
  return out;
}

// Symbol of the centered difference on axis p: i sin(k h) / h.
inline Complex centered_symbol(const Grid& g, const Eigen::Vector3d& k, int p) {
  return {0.0, std::sin(k(p) * g.spacing(p)) / g.spacing(p)};
}

// Band-limited pseudo-random field: sum of a few low Fourier modes with
// amplitudes drawn from `seed`.
inline ScalarField smooth_random(const Grid& g, unsigned seed, int kmax = 3, double offset = 0.0) {
  Rng rng(seed, 99);
  struct Term {
    Eigen::Vector3d k;
    double a, phi;
  };
  std::vector<Term> terms;
  for (int t = 0; t < 6; ++t) {
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    for (int p = 0; p < g.dim(); ++p) {
      const int m = static_cast<int>(std::lround(rng.normal() * kmax / 2.0)) % (kmax + 1);
      k(p) = 2.0 * std::numbers::pi * m / g.extent(p);
    }
    terms.push_back({k, 0.3 * rng.normal(), 3.0 * rng.normal()});
  }
  return ScalarField::from_function(g, [&](const Eigen::Vector3d& x) {
    double v = offset;
    for (const auto& t : terms) v += t.a * std::cos(t.k.dot(x) + t.phi);
    return v;
  });
}

inline VectorField smooth_random_vector(const Grid& g, unsigned seed, int kmax = 3) {
  std::vector<ScalarField> c;
  for (int p = 0; p < g.dim(); ++p) c.push_back(smooth_random(g, seed * 7 + p, kmax));
  return VectorField(std::move(c));
}

// RMS over the grid of the conditional mean of sample(d) over the step's
// Brownian increment, by tensor Gauss-Hermite quadrature.
inline double conditional_mean_rms(const NoiseBasis& basis, double dt,
                                   const std::function<Eigen::ArrayXd(const DiffeoIncrement&)>& sample,
                                   Convention convention = Convention::Raw, int order = 3) {
  const TensorRule rule = gauss_hermite_tensor(basis.size(), order);
  Eigen::ArrayXd mean;
  for (Index c = 0; c < rule.weights.size(); ++c) {
    const DiffeoIncrement d(basis, fixed_increments(dt, std::sqrt(dt) * rule.nodes.col(c)), convention, 100.0);
    const Eigen::ArrayXd x = sample(d);
    if (mean.size() == 0) mean = Eigen::ArrayXd::Zero(x.size());
    mean += rule.weights(c) * x;
  }
  return rms(mean);
}

inline double refinement_slope(const std::vector<double>& dts, const std::function<double(double)>& value) {
  std::vector<double> v;
  for (double dt : dts) v.push_back(value(dt));
  return loglog_slope(dts, v);
}

inline const std::vector<double>& study_dts() {
  static const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  return dts;
}

}  // namespace locpert::testing
