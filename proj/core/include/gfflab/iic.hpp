#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfflab/capacity.hpp"
#include "gfflab/estimators.hpp"
#include "gfflab/metric_graph.hpp"
#include "gfflab/percolation.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::iic {

using gff::FieldSample;
using lattice::Annulus;
using lattice::BoxGeom;
using lattice::Point;

/// Finite-volume realizations of the four incipient-infinite-cluster
/// conditionings. Boundary/Point/Capacity condition at level 0;
/// Supercritical conditions the level -h one-arm as the finite proxy for
/// being in an infinite cluster.
///
/// The Point conditioning uses the centered realization: {0 <-> x} is
/// simulated as {-x/2 <-> x - x/2} so both endpoints keep equal distance
/// from the killed shell; observables anchor at the first endpoint.
struct Conditioning {
  enum class Kind { boundary, point, capacity, supercritical };
  Kind kind = Kind::boundary;
  int N = 0;        // arm scale (boundary, supercritical)
  Point a, b;       // endpoints of the point conditioning
  double T = 0;     // capacity threshold
  double h = 0;     // supercritical level magnitude (> 0)

  static Conditioning boundary_arm(int N);
  static Conditioning point_pair(const Point& x);
  static Conditioning capacity_tail(double T);
  static Conditioning supercritical(double h, int N);

  double level() const { return kind == Kind::supercritical ? -h : 0.0; }
  /// Observables (cylinder sites) are translated by this anchor.
  Point anchor(int d) const;
  std::string describe() const;
};

/// Increasing cylinder event: intersection of {phi_site >= threshold}.
struct CylinderEvent {
  std::vector<Point> sites;
  std::vector<double> thresholds;
  std::string name;
};

/// The fixed six-event battery on sites in B(2) with thresholds in
/// {-1, 0, 1} used by the equivalence report.
std::vector<CylinderEvent> default_battery(int d);

/// One accepted conditioned sample with full diagnostics.
struct ConditionedSample {
  FieldSample field;
  metric::LevelSetGraph graph;
  perc::ClusterLabeling labeling;
  std::uint64_t attempts = 0;
};

/// Rejection-samples (field, opening) until the conditioning holds.
/// Throws AcceptanceError when max_attempts is exhausted.
ConditionedSample sample_conditioned(const Conditioning& cond,
                                     const BoxGeom& box, std::uint64_t seed,
                                     std::uint64_t stream,
                                     std::uint64_t max_attempts = 100000);

struct CylinderTable {
  Conditioning cond;
  int box_radius = 0;
  std::uint64_t accepted = 0, attempts = 0;
  double acceptance_rate = 0;
  std::vector<stats::Estimate> probabilities;  // per event
};

/// Conditional probabilities of the events given the conditioning, from
/// accepted_target rejection samples. Event sites must stay at distance
/// >= box_radius/4 from the killed shell (after anchoring).
CylinderTable cylinder_table(const Conditioning& cond, const BoxGeom& box,
                             const std::vector<CylinderEvent>& events,
                             std::uint64_t accepted_target, std::uint64_t seed,
                             int workers = 1);

struct EquivalencePair {
  std::size_t i = 0, j = 0;
  std::vector<double> z;  // per event
  double max_abs_z = 0;
  bool flagged = false;     // some |z| > 3
  bool trend_only = false;  // same kind at different scales: a convergence
                            // datum, not a failure
};

struct EquivalenceReport {
  std::vector<CylinderTable> tables;
  std::vector<EquivalencePair> pairs;
  bool any_comparable_flag = false;  // flags among non-trend pairs
};

/// Pairwise two-sample z scores of the conditional battery probabilities
/// across conditionings.
EquivalenceReport equivalence_report(
    const std::vector<std::pair<Conditioning, BoxGeom>>& setups,
    const std::vector<CylinderEvent>& battery, std::uint64_t accepted_target,
    std::uint64_t seed, int workers = 1);

/// Conditional volume growth and two-point statistics under the boundary
/// conditioning at a fixed N (delegates to the estimators engine).
struct VolumeGrowthTable {
  int N = 0;
  std::vector<estimators::ConditionalVolumeSummary> by_M;
  std::vector<estimators::ConditionalTwoPointResult> two_point_by_M;
};
VolumeGrowthTable iic_volume_growth(int d, int N,
                                    const std::vector<int>& M_list,
                                    std::uint64_t accepted_target,
                                    std::uint64_t seed, int workers = 1);

/// Frequency with which the conditioned cluster, restricted outside B(n),
/// has a unique component reaching the boundary shell (one-endedness proxy;
/// approaches 1 as N/n grows).
stats::Estimate unique_crossing_diagnostic(int d, const Annulus& ann,
                                           std::uint64_t accepted_target,
                                           std::uint64_t seed,
                                           int workers = 1);

/// Calibrates the capacity threshold so the acceptance rate matches the
/// boundary conditioning at scale N within a factor 2, via the T^{-1/2}
/// tail with the prefactor measured from a pilot run.
double calibrate_capacity_threshold(int d, int N, std::uint64_t pilot_reps,
                                    std::uint64_t seed, int workers = 1);

}  // namespace gfflab::iic
