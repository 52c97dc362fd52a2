#include "locpert/oracle.hpp"

#include "locpert/calculus.hpp"
#include "locpert/error.hpp"

namespace locpert {

namespace {

ScalarField sample_field(const ScalarField& f, const PointSet& points) {
  return ScalarField(f.grid(), sample_at_vec(f, points).array());
}

// J[p * dim + j] = D_j T^p
std::vector<ScalarField> map_jacobian(const DiffeoIncrement& d) {
  const Grid& g = d.grid();
  const int dim = g.dim();
  std::vector<ScalarField> jac;
  for (int p = 0; p < dim; ++p) {
    for (int j = 0; j < dim; ++j) {
      ScalarField c = derivative(d.displacement()[p], j);
      if (p == j) c.values() += 1.0;
      jac.push_back(std::move(c));
    }
  }
  return jac;
}

void expect_count(const std::vector<ScalarField>& fields, std::size_t n, TensorClass cls) {
  if (fields.size() != n) {
    throw InvalidArgument("wrong number of fields for tensor class " + std::string(to_string(cls)));
  }
}

}  // namespace

ScalarField map_jacobian_determinant(const DiffeoIncrement& d) {
  const int dim = d.grid().dim();
  const auto j = map_jacobian(d);
  auto at = [&](int p, int q) -> const Eigen::ArrayXd& { return j[p * dim + q].values(); };
  switch (dim) {
    case 1: return j[0];
    case 2: return ScalarField(d.grid(), at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0));
    default:
      return ScalarField(d.grid(), at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
                                       at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
                                       at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)));
  }
}

ScalarField oracle_0form(const ScalarField& f, const DiffeoIncrement& d) {
  require_same_grid(f.grid(), d.grid(), "0-form oracle");
  return sample_field(f, forward_map(d, d.grid().node_coordinates()));
}

ScalarField oracle_nform(const ScalarField& f, const DiffeoIncrement& d) {
  return oracle_0form(f, d) * map_jacobian_determinant(d);
}

VectorField oracle_1form(const VectorField& v, const DiffeoIncrement& d) {
  require_same_grid(v.grid(), d.grid(), "1-form oracle");
  const int dim = v.dim();
  const PointSet y = forward_map(d, d.grid().node_coordinates());
  std::vector<ScalarField> pulled;
  for (int p = 0; p < dim; ++p) pulled.push_back(sample_field(v[p], y));
  const auto jac = map_jacobian(d);
  VectorField out(v.grid());
  for (int j = 0; j < dim; ++j) {
    for (int p = 0; p < dim; ++p) out[j].values() += pulled[p].values() * jac[p * dim + j].values();
  }
  return out;
}

ScalarField oracle_nvector(const ScalarField& g, const DiffeoIncrement& d) {
  require_same_grid(g.grid(), d.grid(), "n-vector oracle");
  return sample_field(g, inverse_map(d, d.grid().node_coordinates())) * map_jacobian_determinant(d);
}

ScalarField oracle_volume(const DiffeoIncrement& d) { return map_jacobian_determinant(d); }

std::pair<ScalarField, ScalarField> oracle_mixed_pair(const ScalarField& f, const ScalarField& g,
                                                      const DiffeoIncrement& d) {
  require_same_grid(f.grid(), g.grid(), "mixed pair oracle");
  const ScalarField det = map_jacobian_determinant(d);
  const PointSet y = forward_map(d, d.grid().node_coordinates());
  ScalarField gy = sample_field(g, y);
  gy.values() /= det.values();
  return {sample_field(f, y) * det, std::move(gy)};
}

std::vector<ScalarField> oracle_remap(TensorClass cls, const std::vector<ScalarField>& fields,
                                      const DiffeoIncrement& d) {
  switch (cls) {
    case TensorClass::ZeroForm: expect_count(fields, 1, cls); return {oracle_0form(fields[0], d)};
    case TensorClass::NForm: expect_count(fields, 1, cls); return {oracle_nform(fields[0], d)};
    case TensorClass::NVector: expect_count(fields, 1, cls); return {oracle_nvector(fields[0], d)};
    case TensorClass::VolumeForm: expect_count(fields, 0, cls); return {oracle_volume(d)};
    case TensorClass::OneForm: {
      expect_count(fields, static_cast<std::size_t>(d.grid().dim()), cls);
      return oracle_1form(VectorField(fields), d).components();
    }
    case TensorClass::MixedPair: {
      expect_count(fields, 2, cls);
      auto [f, g] = oracle_mixed_pair(fields[0], fields[1], d);
      return {std::move(f), std::move(g)};
    }
  }
  throw InvalidArgument("unknown tensor class");
}

}  // namespace locpert
