#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/field.hpp"
#include "gfflab/percolation.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::loop {

using lattice::BoxGeom;
using lattice::Point;

/// Discrete-time rooted loop: steps[0] = steps[k] = root, consecutive steps
/// are lattice neighbors, all inside the box.
struct RootedLoop {
  Point root;
  std::vector<Point> steps;
  int length() const { return static_cast<int>(steps.size()) - 1; }
};

/// Return probabilities q_k(x,y) = (P_box^k)(x,y) of the killed walk, with
/// all powers up to k_max kept for the backward bridge kernels. Dense;
/// limited to kSamplingVertexLimit vertices.
class LoopMeasure {
 public:
  static constexpr std::int64_t kSamplingVertexLimit = 600;

  LoopMeasure(const BoxGeom& box, int k_max);

  const BoxGeom& box() const { return box_; }
  int k_max() const { return k_max_; }
  double q(int k, std::int64_t x, std::int64_t y) const;
  /// Expected rooted-loop count per intensity: q_k(x,x)/k.
  double bucket_mass(std::int64_t x, int k) const;
  /// Bound on sum_x sum_{k > k_max} q_k(x,x)/k via the exact spectral
  /// radius cos(pi/(L+1)) of the killed transition matrix.
  double residual_mass_bound() const;
  /// sum_{2 <= k <= k_max} q_k(x,x); E[visits(x)] = alpha times this.
  double occupation_mean(std::int64_t x) const;

 private:
  BoxGeom box_;
  int k_max_;
  std::int64_t n_;
  std::vector<std::vector<double>> powers_;  // powers_[k] row-major, k >= 1
};

/// Poissonized soup: independent Poisson counts per (root, length) bucket
/// with mean alpha q_k(x,x)/k, each loop's shape drawn by sequential
/// conditioning with backward kernels q_{k-j}(., x).
struct LoopSoupSample {
  double alpha = 0;
  BoxGeom box{3, 1};
  int k_max = 0;
  std::uint64_t seed = 0, stream = 0;
  std::vector<RootedLoop> loops;
  double residual_mass_bound = 0;
};

LoopSoupSample sample_loop_soup(const LoopMeasure& measure, double alpha,
                                std::uint64_t seed, std::uint64_t stream,
                                double residual_tol = 1e-3);
LoopSoupSample sample_loop_soup(const BoxGeom& box, double alpha, int k_max,
                                std::uint64_t seed, std::uint64_t stream,
                                double residual_tol = 1e-3);

/// Total loop visits per vertex; each traversal counts its root once, so the
/// sum over vertices equals the sum of loop lengths.
struct OccupationField {
  BoxGeom box{3, 1};
  std::vector<std::int64_t> visits;
  std::int64_t total = 0;
};
OccupationField occupation_field(const LoopSoupSample& sample);

/// Union-find over loops sharing a visited vertex; labels the visited set.
perc::ClusterLabeling loop_clusters(const LoopSoupSample& sample);

/// Opening of the sign clusters of a field: every vertex belongs to a sign
/// cluster; an edge is open when its endpoints share a sign and the bridge
/// over |phi| survives. The origin's positive cluster coincides with the
/// level-0 cluster whenever phi_0 >= 0.
class SignOpening {
 public:
  SignOpening(const gff::FieldSample& field, std::uint64_t seed,
              std::uint64_t stream)
      : field_(field), seed_(seed), stream_(stream) {}
  bool active(std::int64_t v) const {
    (void)v;
    return true;  // zero values have probability zero
  }
  bool edge_open(std::int64_t low, int axis) const;

 private:
  const gff::FieldSample& field_;
  std::uint64_t seed_, stream_;
};

/// Validates the loop-cluster <-> sign-cluster dictionary on the GFF side:
/// the one-arm and volume observables of the sign cluster of the origin are
/// exactly twice their level-0 analogues.
struct SignClusterReport {
  int d = 0, N = 0;
  std::uint64_t reps = 0;
  stats::Estimate level_arm;      // P(0 <-> dB(N) at level 0)
  stats::Estimate sign_arm;       // P(0's sign cluster reaches dB(N))
  double factor2_z = stats::kNaN;  // z of theta - sign/2
  double ks_p_sign_symmetry = stats::kNaN;  // +cluster vs -cluster sizes
  std::vector<std::int64_t> vol_thresholds;
  std::vector<double> volume_factor2_z;  // per threshold
};
SignClusterReport sign_cluster_equivalence(int d, int N, std::uint64_t reps,
                                           std::uint64_t seed,
                                           int workers = 1);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

}  // namespace gfflab::loop
