#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfflab/lattice.hpp"

namespace gfflab::gff {

/// One realization of the zero-boundary discrete GFF on a box. The field is
/// random on the whole box (the killed shell lives outside, where the field
/// is identically 0 by convention). Immutable in practice: samplers return
/// by value and nothing mutates values afterwards.
struct FieldSample {
  lattice::BoxGeom box{3, 1};
  std::vector<double> values;  // by box vertex index
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Threshold annotation consumed by downstream level-set construction.
  double level = 0.0;

  double at(const lattice::Point& p) const { return values[box.index(p)]; }

  /// Debug dump: one-line JSON header (d, N, seed, stream, level) followed by
  /// the raw doubles in box index order.
  void save(const std::string& path) const;
  static FieldSample load(const std::string& path);
};

/// Returns a copy annotated with threshold h; field values are untouched.
/// Composing keeps only the last level.
FieldSample shift_level(const FieldSample& field, double h);

}  // namespace gfflab::gff
