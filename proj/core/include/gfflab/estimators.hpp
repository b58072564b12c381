#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "gfflab/greens.hpp"
#include "gfflab/percolation.hpp"
#include "gfflab/prefix_sampler.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::estimators {

using lattice::Point;

/// Stream layout shared by every estimator: replicate r of table row `row`
/// draws from stream (row << 40) | (r << 20) | attempt, so rows and
/// replicates never share randomness and rejection attempts stay disjoint.
inline std::uint64_t replicate_stream(std::uint64_t row, std::uint64_t rep,
                                      std::uint64_t attempt = 0) {
  return (row << 40) | (rep << 20) | attempt;
}

struct OneArmRow {
  int N = 0;
  stats::Estimate theta;
};

struct OneArmTable {
  int d = 0;
  double level = 0;
  std::uint64_t reps = 0;
  std::vector<OneArmRow> rows;
  stats::SlopeFit fit;
};

/// P(0 <-> boundary of B(N) at level h), one sampling box of radius N per
/// row (the killed shell sits just outside; the finite-volume Dirichlet
/// effect is part of the stated convention).
OneArmTable estimate_one_arm(int d, double h, const std::vector<int>& N_list,
                             std::uint64_t reps, std::uint64_t seed,
                             int workers = 1);

/// Crossing probability of the annulus: P(B(n) <-> boundary of B(N)).
stats::Estimate estimate_crossing(int d, int n, int N, std::uint64_t reps,
                                  std::uint64_t seed, int workers = 1);

struct VolumeTailRow {
  std::int64_t M = 0;
  stats::Estimate nu;
  /// Fraction of samples whose cluster touched the box boundary while the
  /// observed volume was below M (the classifications censoring could flip).
  double censored_fraction = 0;
};

struct VolumeTailTable {
  int d = 0;
  int box_radius = 0;
  std::uint64_t reps = 0;
  std::vector<VolumeTailRow> rows;
  /// Fraction of samples whose cluster touched the boundary at all.
  double boundary_touch_fraction = 0;
  bool censor_warning = false;  // raised when the largest-M fraction > 5%
  stats::SlopeFit fit;
};

VolumeTailTable estimate_volume_tail(int d,
                                     const std::vector<std::int64_t>& M_list,
                                     int box_radius, std::uint64_t reps,
                                     std::uint64_t seed, int workers = 1);

struct ConditionalVolumeSummary {
  int d = 0, M = 0, N = 0;
  std::uint64_t accepted = 0, attempts = 0;
  double median = stats::kNaN, q1 = stats::kNaN, q3 = stats::kNaN;
  /// P(V_M >= lambda M^{(d/2+1) /\ 4}) for lambda in {1, 2, 4}.
  std::array<stats::Estimate, 3> tail_at_lambda;
  stats::Estimate p_ge_twice_median;
  std::vector<std::int64_t> volumes;  // accepted-sample volumes, chunk order
};

/// Law of V_M = vol(cluster(0) within B(M)) conditioned on the one-arm event
/// to B(N). Rejection sampling; aborts (AcceptanceError) when the empirical
/// acceptance falls below 1e-4.
ConditionalVolumeSummary estimate_conditional_volume(
    int d, int M, int N, std::uint64_t accepted_target, std::uint64_t seed,
    int workers = 1);

struct ConditionalTwoPointResult {
  int d = 0, M = 0, N = 0;
  Point y;
  stats::Estimate p;
  std::uint64_t attempts = 0;
};

ConditionalTwoPointResult estimate_conditional_two_point(
    int d, int M, const Point& y, int N, std::uint64_t accepted_target,
    std::uint64_t seed, int workers = 1);

/// One rejection run serving both conditional-volume and conditional
/// two-point columns (the acceptance suite shares the runs).
struct ConditionalArmStudy {
  ConditionalVolumeSummary volume;
  std::vector<ConditionalTwoPointResult> two_point;
};
ConditionalArmStudy conditional_arm_study(int d, int M, int N,
                                          const std::vector<Point>& ys,
                                          std::uint64_t accepted_target,
                                          std::uint64_t seed, int workers = 1);

struct ArcsinPair {
  Point x, y;
  stats::Estimate mc;
  double predicted = stats::kNaN;
  double z = stats::kNaN;
};

struct ArcsinReport {
  int d = 0;
  int box_radius = 0;
  std::uint64_t reps = 0;
  std::vector<ArcsinPair> pairs;
};

/// Monte Carlo two-point probabilities against the arcsin prediction with
/// G_D from the dense solve (the joint normalization test of the sampler,
/// the bridge constant, and the Green's function).
ArcsinReport estimate_arcsin(int d, int box_radius,
                             const std::vector<std::pair<Point, Point>>& pairs,
                             std::uint64_t reps, std::uint64_t seed,
                             int workers = 1);

struct QuasiMultRow {
  int N = 0;
  stats::Estimate p_joint;  // P(0 <-> dB(fN))
  stats::Estimate p_arm1;   // P(0 <-> dB(N))
  stats::Estimate p_arm2;   // P(dB(fN) <-> dB(N))
  double ratio = stats::kNaN;
  double ratio_sem = stats::kNaN;
};

struct QuasiMultTable {
  int d = 0;
  int outer_factor = 0;
  std::vector<QuasiMultRow> rows;
};

/// Ratio P(A1 <-> A2) / [N^{0 /\ (6-d)} P(A1 <-> dB(N)) P(A2 <-> dB(N))]
/// with A1 = {0} and A2 = the shell at radius outer_factor*N, estimated on
/// independent replicate thirds so the ratio's sem is the quadrature sum.
QuasiMultTable quasi_mult_ratio(int d, const std::vector<int>& N_list,
                                std::uint64_t reps, std::uint64_t seed,
                                int workers = 1, int outer_factor = 8);

/// Prefix-rejection radius for an origin-anchored box under a ~1 GB column
/// budget; exposed for reuse by the conditioned samplers.
int pick_prefix_radius(const lattice::BoxGeom& box, int n_anchors = 1);

}  // namespace gfflab::estimators
