#pragma once

#include <filesystem>
#include <iosfwd>

#include "locpert/field.hpp"

namespace locpert {

// Field snapshot (.fld) format:
//
//   line 1: dim
//   line 2: points per axis, whitespace separated
//   line 3: extent per axis, whitespace separated
//   then grid.size() IEEE-754 binary64 values, little-endian, row-major.
//
// Extents are written with 17 significant digits so a read-back grid compares
// equal to the one written.

void write_snapshot(std::ostream& out, const ScalarField& f);
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);

ScalarField read_snapshot(std::istream& in);
ScalarField read_snapshot(const std::filesystem::path& path);

}  // namespace locpert
