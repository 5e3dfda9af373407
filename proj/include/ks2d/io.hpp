#pragma once

#include "ks2d/grid.hpp"

#include <string>

namespace ks2d {

/// Snapshot container: a field tagged with its simulation time.
struct FieldSnapshot {
  double t = 0.0;
  ScalarField field;
};

/// Writes the on-disk snapshot format:
///   header line "KS2D <n> <box_length> <t>\n"
///   then n*n float64 values, little-endian, row-major.
void write_field(const std::string& path, const FieldSnapshot& snap);

/// Reads a snapshot written by write_field. Throws on malformed header,
/// size mismatch, or short payload.
FieldSnapshot read_field(const std::string& path);

} // namespace ks2d
