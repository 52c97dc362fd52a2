#include "locpert/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "locpert/error.hpp"

namespace locpert {

ScalarField roll(const ScalarField& f, int axis, Index offset) {
  const Grid& g = f.grid();
  g.check_axis(axis);
  Index outer = 1, inner = 1;
  for (int p = 0; p < axis; ++p) outer *= g.points(p);
  for (int p = axis + 1; p < 3; ++p) inner *= g.points(p);
  const Index len = g.points(axis);
  Index shift = offset % len;
  if (shift < 0) shift += len;

  const Eigen::ArrayXd& in = f.values();
  Eigen::ArrayXd out(in.size());
  for (Index o = 0; o < outer; ++o) {
    for (Index k = 0; k < len; ++k) {
      Index src = k + shift;
      if (src >= len) src -= len;
      out.segment((o * len + k) * inner, inner) = in.segment((o * len + src) * inner, inner);
    }
  }
  return ScalarField(g, std::move(out));
}

ScalarField derivative(const ScalarField& f, int axis) {
  const Grid& g = f.grid();
  g.check_axis(axis);
  const double inv = 1.0 / (2.0 * g.spacing(axis));
  ScalarField out = roll(f, axis, 1);
  out.values() = (out.values() - roll(f, axis, -1).values()) * inv;
  return out;
}

ScalarField second_derivative(const ScalarField& f, int axis_p, int axis_q) {
  f.grid().check_axis(axis_p);
  f.grid().check_axis(axis_q);
  const int lo = std::min(axis_p, axis_q);
  const int hi = std::max(axis_p, axis_q);
  return derivative(derivative(f, hi), lo);
}

double integrate(const ScalarField& f) {
  if (f.size() == 0) return 0.0;
  return f.values().mean() * f.grid().volume();
}

namespace {

struct AxisStencil {
  Index base;
  double w[4];
};

AxisStencil catmull_rom(const Grid& g, int axis, double x) {
  const double h = g.spacing(axis);
  const Index n = g.points(axis);
  double u = g.wrap(axis, x) / h;
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < 1e-12 * std::max(1.0, std::abs(u))) u = nearest;
  double fl = std::floor(u);
  const double s = u - fl;
  Index k = static_cast<Index>(fl) % n;
  if (k < 0) k += n;
  const double s2 = s * s, s3 = s2 * s;
  AxisStencil st{};
  st.base = k;
  st.w[0] = 0.5 * (-s3 + 2.0 * s2 - s);
  st.w[1] = 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
  st.w[2] = 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
  st.w[3] = 0.5 * (s3 - s2);
  return st;
}

inline Index wrap_index(Index k, Index n) {
  k %= n;
  return k < 0 ? k + n : k;
}

}  // namespace

Eigen::VectorXd sample_at_vec(const ScalarField& f, const PointSet& points) {
  const Grid& g = f.grid();
  const int dim = g.dim();
  if (points.rows() != dim) throw InvalidArgument("sample points must have one row per grid axis");
  const Eigen::ArrayXd& v = f.values();
  Eigen::VectorXd out(points.cols());

  for (Index c = 0; c < points.cols(); ++c) {
    AxisStencil st[3];
    for (int p = 0; p < 3; ++p) {
      if (p < dim) {
        st[p] = catmull_rom(g, p, points(p, c));
      } else {
        st[p] = AxisStencil{0, {0.0, 1.0, 0.0, 0.0}};
      }
    }
    const int r0 = 4, r1 = dim > 1 ? 4 : 1, r2 = dim > 2 ? 4 : 1;
    double acc = 0.0;
    for (int a = 0; a < r0; ++a) {
      const double wa = st[0].w[a];
      if (wa == 0.0) continue;
      const Index i0 = wrap_index(st[0].base + a - 1, g.points(0));
      for (int b = 0; b < r1; ++b) {
        const double wb = dim > 1 ? st[1].w[b] : 1.0;
        if (wb == 0.0) continue;
        const Index i1 = dim > 1 ? wrap_index(st[1].base + b - 1, g.points(1)) : 0;
        for (int d = 0; d < r2; ++d) {
          const double wd = dim > 2 ? st[2].w[d] : 1.0;
          if (wd == 0.0) continue;
          const Index i2 = dim > 2 ? wrap_index(st[2].base + d - 1, g.points(2)) : 0;
          acc += wa * wb * wd * v(g.flat({i0, i1, i2}));
        }
      }
    }
    out(c) = acc;
  }
  return out;
}

std::vector<double> sample_at(const ScalarField& f, const PointSet& points) {
  const Eigen::VectorXd s = sample_at_vec(f, points);
  return {s.data(), s.data() + s.size()};
}

VectorField gradient(const ScalarField& f) {
  std::vector<ScalarField> c;
  for (int p = 0; p < f.grid().dim(); ++p) c.push_back(derivative(f, p));
  return VectorField(std::move(c));
}

ScalarField divergence(const VectorField& v) {
  ScalarField out(v.grid());
  for (int p = 0; p < v.dim(); ++p) out += derivative(v[p], p);
  return out;
}

ScalarField curl2(const VectorField& v) {
  if (v.dim() != 2) throw InvalidArgument("scalar curl needs a 2D vector field");
  return derivative(v[1], 0) - derivative(v[0], 1);
}

VectorField curl3(const VectorField& v) {
  if (v.dim() != 3) throw InvalidArgument("vector curl needs a 3D vector field");
  return VectorField({derivative(v[2], 1) - derivative(v[1], 2),
                      derivative(v[0], 2) - derivative(v[2], 0),
                      derivative(v[1], 0) - derivative(v[0], 1)});
}

ScalarField advective_derivative(const VectorField& v, const ScalarField& f) {
  require_same_grid(v.grid(), f.grid(), "advective derivative");
  ScalarField out(f.grid());
  for (int p = 0; p < v.dim(); ++p) out.values() += v[p].values() * derivative(f, p).values();
  return out;
}

}  // namespace locpert
