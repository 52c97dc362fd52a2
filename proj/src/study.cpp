#include "locpert/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "locpert/calculus.hpp"
#include "locpert/conservation.hpp"
#include "locpert/error.hpp"
#include "locpert/oracle.hpp"
#include "locpert/quadrature.hpp"

namespace locpert {

const MetricSeries& StudyResult::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw InvalidArgument("study has no metric " + name);
}

namespace {

constexpr const char* kPathwise = "_pathwise";

struct MetricDef {
  std::string name;
  bool uses_3d = false;
  double points = 1.0;  // value = sqrt(sum(sample^2) / points)
  double floor = 0.0;
  std::function<Eigen::ArrayXd(const DiffeoIncrement&)> sample;
};

Eigen::ArrayXd stack(const VectorField& v) {
  Eigen::ArrayXd out(v.grid().size() * v.dim());
  for (int p = 0; p < v.dim(); ++p) out.segment(p * v.grid().size(), v.grid().size()) = v[p].values();
  return out;
}

Eigen::ArrayXd scalar(double x) { return Eigen::ArrayXd::Constant(1, x); }

double abs_integral(const Eigen::ArrayXd& integrand, const Grid& g) {
  return integrand.abs().mean() * g.volume();
}

ForecastOptions study_options(const StudySetup& s) {
  ForecastOptions o;
  o.convention = s.convention;
  o.nform_mode = s.nform_mode;
  o.safety_factor = s.safety_factor;
  o.stability_constant = std::numeric_limits<double>::infinity();
  return o;
}

std::vector<MetricDef> define_metrics(const StudySetup& s) {
  std::vector<MetricDef> defs;
  const Grid& grid = s.basis.grid();
  const double n = static_cast<double>(grid.size());
  const ScalarField f = s.f;
  const ScalarField g = s.g;
  const NFormMode mode = s.nform_mode;

  defs.push_back({"mismatch_0form", false, n, 0.0, [f](const DiffeoIncrement& d) {
                    return Eigen::ArrayXd(perturb_0form(f, d).realized.values() -
                                          (oracle_0form(f, d) - f).values());
                  }});
  defs.push_back({"mismatch_nform", false, n, 0.0, [f, mode](const DiffeoIncrement& d) {
                    return Eigen::ArrayXd(perturb_nform(f, d, mode).realized.values() -
                                          (oracle_nform(f, d) - f).values());
                  }});
  defs.push_back({"mismatch_nvector", false, n, 0.0, [f](const DiffeoIncrement& d) {
                    return Eigen::ArrayXd(pushforward_nvector(f, d).realized.values() -
                                          (oracle_nvector(f, d) - f).values());
                  }});
  if (s.u && grid.dim() >= 2) {
    const VectorField u = *s.u;
    defs.push_back({"mismatch_1form", false, n, 0.0, [u](const DiffeoIncrement& d) {
                      return stack(perturb_1form(u, d).realized - (oracle_1form(u, d) - u));
                    }});
  }
  defs.push_back({"composition_residual", false, n, 0.0, [&grid](const DiffeoIncrement& d) {
                    const PointSet x = grid.node_coordinates();
                    const PointSet y = forward_map(d, inverse_map(d, x));
                    Eigen::ArrayXd out(x.size());
                    for (int p = 0; p < grid.dim(); ++p) {
                      for (Index c = 0; c < x.cols(); ++c) {
                        out(p * x.cols() + c) = grid.periodic_delta(p, y(p, c), x(p, c));
                      }
                    }
                    return out;
                  }});

  if (g.size() > 0) {
    const double fg0 = product_integral(f, g, 1);
    defs.push_back({"drift_fg", false, 1.0, 1e-12 * abs_integral(f.values() * g.values(), grid),
                    [f, g, mode, fg0](const DiffeoIncrement& d) {
                      const ScalarField fh = f + perturb_nform(f, d, mode).realized;
                      const ScalarField gh = g + perturb_0form(g, d).realized;
                      return scalar(product_integral(fh, gh, 1) - fg0);
                    }});
    const double p0 = pairing_integral(f, g);
    defs.push_back({"drift_f2g", false, 1.0, 1e-12 * abs_integral(f.values().square() * g.values(), grid),
                    [f, g, mode, p0](const DiffeoIncrement& d) {
                      auto [pf, pg] = perturb_mixed_pair(f, g, d, mode);
                      return scalar(pairing_integral(f + pf.realized, g + pg.realized) - p0);
                    }});
  }

  if (s.u3 && s.basis3) {
    const VectorField u3 = *s.u3;
    const double h0 = helicity(u3);
    const double scale = abs_integral(dot(u3, curl3(u3)).values(), u3.grid());
    defs.push_back({"drift_helicity", true, 1.0, 1e-12 * scale, [u3, h0](const DiffeoIncrement& d) {
                      return scalar(helicity(u3 + perturb_1form(u3, d).realized) - h0);
                    }});
  }

  if (s.tsw) {
    const TswState st = *s.tsw;
    const TswInvariants i0 = tsw_invariants(st);
    const ForecastOptions opt = study_options(s);
    const Eigen::ArrayXd speed2 = st.u[0].values().square() + st.u[1].values().square();
    const double e_scale = abs_integral(0.5 * (st.h.values() * speed2 + st.h.values().square() * st.theta.values()), grid);
    const double m_scale = abs_integral(st.h.values() * speed2.sqrt(), grid);
    const double mass_scale = abs_integral(st.h.values(), grid);
    auto step = [st, opt](const DiffeoIncrement& d) {
      return tsw_invariants(tsw_perturbation_step(st, d.basis(), d.increments(), opt));
    };
    defs.push_back({"tsw_energy", false, 1.0, 1e-12 * e_scale,
                    [step, i0](const DiffeoIncrement& d) { return scalar(step(d).energy - i0.energy); }});
    defs.push_back({"tsw_momentum", false, 1.0, 1e-12 * std::max(m_scale, mass_scale),
                    [step, i0](const DiffeoIncrement& d) {
                      return Eigen::ArrayXd((step(d).momentum - i0.momentum).array());
                    }});
    defs.push_back({"tsw_mass", false, 1.0, 1e-12 * mass_scale,
                    [step, i0](const DiffeoIncrement& d) { return scalar(step(d).mass - i0.mass); }});
  }

  if (s.u && grid.dim() == 2) {
    const VectorField u = *s.u;
    const ScalarField omega = curl2(u);
    defs.push_back({"vorticity_commutation", false, n, 0.0, [u, omega](const DiffeoIncrement& d) {
                      return Eigen::ArrayXd((curl2(perturb_1form(u, d).realized) -
                                             perturb_nform(omega, d, NFormMode::Pointwise).realized)
                                                .values());
                    }});
  }
  return defs;
}

double reduce(const Eigen::ArrayXd& x, double points) { return std::sqrt(x.square().sum() / points); }

}  // namespace

std::vector<std::string> available_metrics(const StudySetup& setup) {
  std::vector<std::string> names;
  const auto defs = define_metrics(setup);
  for (const auto& d : defs) names.push_back(d.name);
  for (const auto& d : defs) names.push_back(d.name + kPathwise);
  return names;
}

StudyResult convergence_study(const StudySetup& setup, const std::vector<double>& dts,
                              const std::vector<std::string>& metrics) {
  if (dts.size() < 3) throw InvalidArgument("a convergence study needs at least three time steps");
  const double dt_min = *std::min_element(dts.begin(), dts.end());
  if (!(dt_min > 0.0)) throw InvalidArgument("time steps must be positive");
  std::vector<int> spans;
  for (double dt : dts) {
    const double r = dt / dt_min;
    if (std::abs(r - std::round(r)) > 1e-9 * r) {
      throw InvalidArgument("every dt must be an integer multiple of the smallest for matched paths");
    }
    spans.push_back(static_cast<int>(std::lround(r)));
  }
  const int max_span = *std::max_element(spans.begin(), spans.end());

  const auto defs = define_metrics(setup);
  struct Selected {
    const MetricDef* def;
    bool pathwise;
    std::string name;
  };
  std::vector<Selected> selected;
  for (const auto& name : metrics) {
    const bool pathwise = name.size() > 9 && name.ends_with(kPathwise);
    const std::string base = pathwise ? name.substr(0, name.size() - 9) : name;
    auto it = std::find_if(defs.begin(), defs.end(), [&](const MetricDef& d) { return d.name == base; });
    if (it == defs.end()) throw InvalidArgument("unknown or unavailable metric " + name);
    selected.push_back({&*it, pathwise, name});
  }

  const NoiseBasis& basis = setup.basis;
  const NoiseBasis basis3 = setup.basis3 ? *setup.basis3 : NoiseBasis(basis.grid());
  Rng rng(setup.seed, 0);
  Rng rng3(setup.seed, 1);
  const BrownianPath fine = sample_path(basis.size(), dt_min, max_span, rng);
  const BrownianPath fine3 = sample_path(basis3.size(), dt_min, max_span, rng3);
  const TensorRule rule = gauss_hermite_tensor(basis.size(), setup.quadrature_order);
  const TensorRule rule3 = gauss_hermite_tensor(basis3.size(), setup.quadrature_order);

  StudyResult result;
  result.dts = dts;
  for (const auto& s : selected) {
    MetricSeries m;
    m.name = s.name;
    m.floor = s.def->floor;
    result.metrics.push_back(m);
  }

  for (std::size_t k = 0; k < dts.size(); ++k) {
    const double dt = dts[k];
    auto increment = [&](bool three, const Eigen::VectorXd& eta) {
      return DiffeoIncrement(three ? basis3 : basis, fixed_increments(dt, eta), setup.convention,
                             setup.safety_factor);
    };
    auto matched = [&](bool three) {
      const BrownianPath& p = three ? fine3 : fine;
      Eigen::VectorXd eta = p.topRows(spans[k]).colwise().sum().transpose();
      return increment(three, eta);
    };

    for (std::size_t j = 0; j < selected.size(); ++j) {
      const MetricDef& def = *selected[j].def;
      double value = 0.0;
      if (selected[j].pathwise) {
        value = reduce(def.sample(matched(def.uses_3d)), def.points);
      } else {
        const TensorRule& r = def.uses_3d ? rule3 : rule;
        Eigen::ArrayXd mean;
        for (Index c = 0; c < r.weights.size(); ++c) {
          const Eigen::VectorXd eta = std::sqrt(dt) * r.nodes.col(c);
          const Eigen::ArrayXd x = def.sample(increment(def.uses_3d, eta));
          if (mean.size() == 0) mean = Eigen::ArrayXd::Zero(x.size());
          mean += r.weights(c) * x;
        }
        value = reduce(mean, def.points);
      }
      result.metrics[j].values.push_back(value);
    }
  }

  for (auto& m : result.metrics) {
    m.at_roundoff = std::all_of(m.values.begin(), m.values.end(), [&](double v) { return v <= m.floor; });
    const bool positive = std::all_of(m.values.begin(), m.values.end(), [](double v) { return v > 0.0; });
    m.slope = positive ? loglog_slope(dts, m.values) : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
  out << "dt,metric,value,slope\n";
  char buf[256];
  for (const auto& m : result.metrics) {
    for (std::size_t k = 0; k < result.dts.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", result.dts[k], m.name.c_str(), m.values[k], m.slope);
      out << buf;
    }
  }
}

}  // namespace locpert
