#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/field.hpp"
#include "gfflab/free_green.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::harm {

using gff::FieldSample;
using lattice::Point;

/// The origin's level-0 cluster explored with edges restricted to B(n),
/// together with its field values. Empty when phi_0 < 0.
struct ExploredCluster {
  int d = 0;
  int n = 0;  // exploration radius
  std::vector<Point> vertices;
  std::vector<double> values;
};

/// Exploration restricted to B(n) of the field's own box; uniforms are
/// addressed exactly as in the unrestricted opening, so the result is a
/// measurable function of the full opening (explored subset of the full
/// cluster under the same (seed, stream)).
ExploredCluster explore_cluster(const FieldSample& field, int n,
                                std::uint64_t seed, std::uint64_t stream);

struct HarmonicAverage {
  double value = 0;
  double sem = 0;            // 0 for the solve backend
  int sphere_radius = 0;     // d*n
  double walk_kill_radius = 0;
  double tail_bias_bound = 0;  // bound on the mass lost to the walk cutoff
};

/// Sphere-averaged conditional expectation sum_w P_y(hit cluster at w) phi_w
/// over y on the discrete sphere of radius d*n, estimated by killed random
/// walks (kill radius 8 d n, escaped mass bounded via Green ratios).
HarmonicAverage harmonic_average(const ExploredCluster& cluster, int n,
                                 int walk_reps, std::uint64_t seed);

/// Exact backend: harmonic extension of the cluster values solved on the
/// box of radius 8 d n (killed at its boundary, matching the walk cutoff).
/// H > 0 exactly when the cluster is nonempty and reachable.
HarmonicAverage harmonic_average_solve(const ExploredCluster& cluster, int n);

/// Conditional-connectivity check: fixes the cluster values, redraws the
/// complement from the exact conditional Gaussian law, opens edges with
/// fresh uniforms, and compares the frequency of {cluster <-> x} with
/// (|x|^{2-d} n^{d-2} Hbar) /\ 1. The ratio across |x| is the assertion.
struct Lemma21Report {
  Point x;
  std::uint64_t reps = 0;
  stats::Estimate connect;
  double hbar = 0;
  double predictor = 0;
  double ratio = stats::kNaN;
  double ratio_sem = stats::kNaN;
};
Lemma21Report lemma21_check(const ExploredCluster& cluster, const Point& x,
                            std::uint64_t reps, std::uint64_t seed);

}  // namespace gfflab::harm
