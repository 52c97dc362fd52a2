#include "locpert/conservation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

double total_integral(const ScalarField& f) { return integrate(f); }

double product_integral(const ScalarField& f, const ScalarField& g, int m) {
  require_same_grid(f.grid(), g.grid(), "product integral");
  if (m < 0) throw InvalidArgument("power must be non-negative");
  if (m == 0) return integrate(f);
  return integrate(ScalarField(f.grid(), f.values() * g.values().pow(m)));
}

double pairing_integral(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "pairing integral");
  return integrate(ScalarField(f.grid(), f.values().square() * g.values()));
}

double vorticity_commutation(const VectorField& u, const DiffeoIncrement& d) {
  if (u.grid().dim() != 2) throw InvalidArgument("vorticity commutation needs a 2D field");
  const ScalarField lhs = curl2(perturb_1form(u, d).realized);
  const ScalarField rhs = perturb_nform(curl2(u), d, NFormMode::Pointwise).realized;
  return (lhs - rhs).rms();
}

double helicity(const VectorField& u) {
  if (u.grid().dim() != 3) throw InvalidArgument("helicity needs a 3D field");
  return integrate(dot(u, curl3(u)));
}

double helicity_drift(const VectorField& u, const DiffeoIncrement& d) {
  const double before = helicity(u);
  return std::abs(helicity(u + perturb_1form(u, d).realized) - before);
}

void DiagnosticSeries::push(double t, double value) {
  if (!times_.empty() && !(t > times_.back())) {
    throw InvalidArgument("diagnostic times must be strictly increasing");
  }
  times_.push_back(t);
  values_.push_back(value);
}

void DiagnosticSeries::write_csv(std::ostream& out) const {
  out << "time," << name_ << '\n';
  char buf[64];
  for (std::size_t k = 0; k < times_.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", times_[k], values_[k]);
    out << buf;
  }
}

void DiagnosticSeries::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeAbort("cannot open " + path.string() + " for writing");
  write_csv(out);
}

}  // namespace locpert
