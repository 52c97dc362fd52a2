#pragma once

#include <utility>
#include <vector>

#include "locpert/diffeo.hpp"

namespace locpert {

// Formula-free evaluation of the remapped fields: values are interpolated at
// mapped nodes and Jacobians come from centered differences of the map's
// displacement.  These return the remapped field itself, not the increment.

/// det(I + D(a dt + s sum_i e_i deta_i)) at the nodes.
ScalarField map_jacobian_determinant(const DiffeoIncrement& d);

/// f(T(x))
ScalarField oracle_0form(const ScalarField& f, const DiffeoIncrement& d);

/// f(T(x)) det DT(x)
ScalarField oracle_nform(const ScalarField& f, const DiffeoIncrement& d);

/// f_p(T(x)) D_j T^p(x)
VectorField oracle_1form(const VectorField& v, const DiffeoIncrement& d);

/// g(T^{-1}(x)) det DT(x)
ScalarField oracle_nvector(const ScalarField& g, const DiffeoIncrement& d);

/// det DT(x)
ScalarField oracle_volume(const DiffeoIncrement& d);

/// (f(T(x)) det DT(x), g(T(x)) / det DT(x)): the n-form pulled back by T and
/// the n-vector pushed forward by T^{-1}.
std::pair<ScalarField, ScalarField> oracle_mixed_pair(const ScalarField& f, const ScalarField& g,
                                                      const DiffeoIncrement& d);

/// Dispatch on the tensor class.  `fields` holds one scalar for ZeroForm,
/// NForm and NVector, dim components for OneForm, none for VolumeForm and
/// (n-form, n-vector) for MixedPair.
std::vector<ScalarField> oracle_remap(TensorClass cls, const std::vector<ScalarField>& fields,
                                      const DiffeoIncrement& d);

}  // namespace locpert
