#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace gfflab::stats {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Monte Carlo summary. For proportions `successes` carries the raw event
/// count and the Wilson 95% interval is filled alongside sem; rare-event
/// reports always include the raw count, and `upper95` gives the one-sided
/// bound that replaces the mean when no successes were seen.
struct Estimate {
  double mean = kNaN;
  double sem = kNaN;
  std::uint64_t n = 0;
  std::uint64_t successes = 0;
  bool is_proportion = false;
  double wilson_low = kNaN;
  double wilson_high = kNaN;
  double upper95 = kNaN;

  static Estimate from_moments(double mean, double sem, std::uint64_t n);
  static Estimate from_proportion(std::uint64_t successes, std::uint64_t n);
};

/// Streaming mean/variance (Welford), with Kahan-compensated sums so merged
/// reductions are order-insensitive at the 1e-12 level.
class StreamingStats {
 public:
  void add(double x);
  void merge(const StreamingStats& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : kNaN; }
  double variance() const;  // unbiased
  double sem() const;
  Estimate estimate() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
  double mean_c_ = 0;  // compensation terms
  double m2_c_ = 0;
};

/// Weighted log-log regression point: abscissa x > 0, estimate y > 0 with
/// standard error y_sem.
struct LogLogPoint {
  double x = 0;
  double y = 0;
  double y_sem = 0;
};

/// Weighted least-squares fit of log y on log x with weights 1/(relative
/// sem)^2. Nonpositive estimates are dropped (counted in `dropped`).
struct SlopeFit {
  double slope = kNaN;
  double intercept = kNaN;
  double slope_stderr = kNaN;
  double r_squared = kNaN;  // NaN when undefined (constant input)
  int points_used = 0;
  int dropped = 0;
  std::vector<double> log_x, log_y, weight;  // fit reproducible from these
};

SlopeFit fit_loglog(const std::vector<LogLogPoint>& points);

/// Two-sample z score (difference over combined standard error).
double z_score(const Estimate& a, const Estimate& b);

/// Quantile of sorted-copy data (linear interpolation).
double quantile(std::vector<double> values, double q);

}  // namespace gfflab::stats
