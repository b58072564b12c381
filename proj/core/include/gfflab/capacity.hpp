#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/free_green.hpp"
#include "gfflab/percolation.hpp"
#include "gfflab/stats.hpp"

namespace gfflab::cap {

using greens::FreeGreenTable;
using lattice::Point;

/// Equilibrium measure of a finite vertex set: the solution of
/// G|_{DxD} q = 1 (last-exit decomposition; the hitting probability from
/// inside D is 1). Its total mass is the capacity. Weights are nonnegative
/// up to solver tolerance; the most negative raw value is reported and
/// clipped.
struct EquilibriumMeasure {
  std::vector<Point> points;
  std::vector<double> weights;
  double total = 0;
  double min_raw_weight = 0;
};

/// Dense-solve size limit for equilibrium systems.
inline constexpr std::size_t kEquilibriumDenseLimit = 3000;

EquilibriumMeasure equilibrium(const std::vector<Point>& vertex_set,
                               const FreeGreenTable& green);

/// Capacity of an arbitrary vertex set with automatic backend: dense
/// equilibrium solve up to kEquilibriumDenseLimit vertices, Monte Carlo
/// hitting estimator beyond (sem reported; deterministic given seed).
struct CapacityEstimate {
  double value = 0;
  double sem = 0;  // 0 for the dense backend
  bool monte_carlo = false;
  std::uint64_t walks = 0;
};
CapacityEstimate capacity_of(const std::vector<Point>& vertex_set,
                             const FreeGreenTable& green, std::uint64_t seed,
                             std::uint64_t walks = 2000);

/// Capacity of a labeled cluster's lattice vertex set (the vertex-set
/// approximation of the metric-graph capacity).
CapacityEstimate cluster_capacity(const perc::ClusterLabeling& labeling,
                                  int cluster_id, const FreeGreenTable& green,
                                  std::uint64_t seed = 0x9a7);

/// Monte Carlo hitting probability P_w(tau_D < infty) from a far point,
/// with walks killed beyond a radius and the escaped-return mass restored
/// through the Green-ratio geometric correction (documented bias control).
struct HittingEstimate {
  double p = 0;   // corrected
  double sem = 0;
  double raw = 0;  // uncorrected frequency
  std::uint64_t walks = 0;
};
HittingEstimate hitting_probability_mc(const Point& from,
                                       const std::vector<Point>& target,
                                       const FreeGreenTable& green,
                                       double kill_radius, std::uint64_t walks,
                                       std::uint64_t seed);

struct SubadditivityReport {
  double cap_1 = 0;
  double cap_2 = 0;
  double cap_union = 0;
  double tolerance = 0;
  bool subadditive_ok = false;  // cap(D1 u D2) <= cap(D1) + cap(D2)
  bool monotone_ok = false;     // cap(D1) <= cap(D1 u D2)
};
SubadditivityReport subadditivity_check(const std::vector<Point>& d1,
                                        const std::vector<Point>& d2,
                                        const FreeGreenTable& green);

}  // namespace gfflab::cap
