#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/field.hpp"
#include "gfflab/rng.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::metric {

using gff::FieldSample;
using lattice::BoxGeom;

/// Probability that the Brownian bridge on an edge interval of length d
/// (driving motion of variance 2 at time 1) from a to b stays strictly above
/// h; 0 when either endpoint is at or below the level. Closed form
/// 1 - exp(-(a-h)(b-h)/d).
double bridge_open_prob(double a, double b, double h, int d);

/// Discretized-bridge Monte Carlo check of the closed form: pinned Gaussian
/// walk with per-step variance 2 d/steps. Underestimates level crossings
/// (discrete minimum >= continuous minimum), so the estimate is biased up by
/// O(sqrt(1/steps)); step-doubling extrapolation removes the leading term.
stats::Estimate bridge_hit_oracle(double a, double b, double h, int d,
                                  int steps, std::uint64_t reps,
                                  std::uint64_t seed);

/// Vertex-connectivity skeleton of the metric-graph level set at threshold h:
/// a vertex is active when phi_x >= h; the canonical edge {x,y} is open when
/// both endpoints are active and its uniform (addressed by canonical edge id)
/// falls below the bridge survival probability. Given the field, edge states
/// are independent across edges; sharing (seed, stream) across levels gives
/// the monotone coupling.
struct LevelSetGraph {
  BoxGeom box{3, 1};
  double level = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<std::uint8_t> active;  // per vertex
  std::vector<std::uint8_t> open;    // per canonical edge id

  bool edge_open(std::int64_t edge_id) const { return open[edge_id] != 0; }
};

LevelSetGraph open_level_set(const FieldSample& field, double h,
                             std::uint64_t seed, std::uint64_t stream);

/// Uses the field's level annotation (see gff::shift_level).
LevelSetGraph open_level_set(const FieldSample& field, std::uint64_t seed,
                             std::uint64_t stream);

/// Lazy view of the same opening: probes activity and edge state on demand
/// without materializing the graph. Bit-compatible with open_level_set for
/// the same (field, h, seed, stream).
class LazyOpening {
 public:
  LazyOpening(const FieldSample& field, double h, std::uint64_t seed,
              std::uint64_t stream)
      : field_(field), h_(h), seed_(seed), stream_(stream) {}

  const BoxGeom& box() const { return field_.box; }
  double level() const { return h_; }

  bool active(std::int64_t v) const { return field_.values[v] >= h_; }

  /// Edge between `low` and `low + stride(axis)`.
  bool edge_open(std::int64_t low, int axis) const {
    const double a = field_.values[low];
    if (a < h_) return false;
    const std::int64_t high = low + field_.box.stride(axis);
    const double b = field_.values[high];
    if (b < h_) return false;
    const std::int64_t id = field_.box.edge_id(low, axis);
    const double u =
        rng::uniform_at(seed_, stream_, rng::Domain::edge_uniforms,
                        static_cast<std::uint64_t>(id));
    return u < bridge_open_prob(a, b, h_, field_.box.dim());
  }

 private:
  const FieldSample& field_;
  double h_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace gfflab::metric
