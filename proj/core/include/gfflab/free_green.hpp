#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfflab/lattice.hpp"

namespace gfflab::greens {

using lattice::Point;

/// Free-space Green's function table of the discrete-time simple random walk
/// on Z^d (d >= 3): values G(0,x) = expected visits to x from 0, time 0
/// included, stored on the nonnegative orthant |x_j| <= range (G is invariant
/// under coordinate sign flips).
class FreeGreenTable {
 public:
  int dim() const { return dim_; }
  int range() const { return range_; }
  /// Quadrature grid per axis; 0 for the Bessel-integral backend.
  int grid() const { return grid_; }

  bool covers(const Point& x) const;
  /// G(0,x); throws std::domain_error when |x|_inf > range.
  double at(const Point& x) const;
  /// Lookup by absolute displacement components (hot-path overload).
  double at_abs(const int* absdx) const;

  /// Primary backend: d-dimensional midpoint Fourier quadrature of
  /// 1/(1 - (1/d) sum_j cos k_j) with the k=0 pole removed by a Gaussian-
  /// damped subtraction whose integral is computed in closed 1-d form; the
  /// grid sum reduces to a DCT-II. Doubling the grid must move values by
  /// less than `tol`; otherwise throws.
  static FreeGreenTable build_fourier(int dim, int range, int grid,
                                      double tol = 1e-6);

  /// Independent backend via the Bessel-integral representation
  /// G(x) = int_0^inf e^{-t} prod_j I_{x_j}(t/d) dt (scaled Bessels, explicit
  /// large-t tail). Used as the cross-check oracle and for d >= 6.
  static FreeGreenTable build_bessel(int dim, int range);

  /// Cache file: CSV "x1,...,xd,value" over the stored orthant with a header
  /// comment carrying (dim, range, grid).
  void save_csv(const std::string& path) const;
  static FreeGreenTable load_csv(const std::string& path);

 private:
  int dim_ = 0;
  int range_ = 0;
  int grid_ = 0;
  std::vector<double> values_;
  std::int64_t index_abs(const int* absdx) const;
};

/// G(0,x) for d >= 3 from a process-wide cached default table (Fourier for
/// d <= 5, Bessel for d >= 6), with a per-point Bessel fallback outside the
/// table range. Throws std::domain_error for d <= 2 (recurrent walk).
double free_green(int d, const Point& x);

/// Single-point evaluation through the Bessel-integral route.
double free_green_bessel(int d, const Point& x);

/// G(0,0) for dimension d.
double green_zero(int d);

/// Shared default table (built on first use).
const FreeGreenTable& default_table(int d);

/// Monte Carlo visit-count oracle: average number of visits to each target by
/// a T-step SRW from the origin, plus the analytic local-CLT tail beyond T.
/// sem folds in the (documented) bound on the tail's own error.
struct VisitCountEstimate {
  double mean = 0;
  double sem = 0;
  double tail_correction = 0;
  double tail_uncertainty = 0;
  std::uint64_t walks = 0;
  int steps = 0;
};
std::vector<VisitCountEstimate> visit_count_oracle(
    int d, const std::vector<Point>& targets, std::uint64_t walks, int steps,
    std::uint64_t seed);

}  // namespace gfflab::greens
