#include "gfflab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfflab::stats {

Estimate Estimate::from_moments(double mean, double sem, std::uint64_t n) {
  Estimate e;
  e.mean = mean;
  e.sem = sem;
  e.n = n;
  return e;
}

Estimate Estimate::from_proportion(std::uint64_t successes, std::uint64_t n) {
  Estimate e;
  e.n = n;
  e.successes = successes;
  e.is_proportion = true;
  if (n == 0) return e;
  const double p = double(successes) / double(n);
  e.mean = p;
  e.sem = std::sqrt(p * (1.0 - p) / double(n));
  // Wilson 95%
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / double(n);
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / double(n) + z2 / (4.0 * double(n) * n)) /
      denom;
  e.wilson_low = std::max(0.0, center - half);
  e.wilson_high = std::min(1.0, center + half);
  // one-sided 95% upper bound, meaningful when successes == 0
  e.upper95 = 1.0 - std::pow(0.05, 1.0 / double(n));
  return e;
}

namespace {
inline void kahan_add(double& sum, double& comp, double x) {
  const double y = x - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}
}  // namespace

void StreamingStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  kahan_add(mean_, mean_c_, delta / double(n_));
  kahan_add(m2_, m2_c_, delta * (x - mean_));
}

void StreamingStats::merge(const StreamingStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double delta = o.mean_ - mean_;
  const std::uint64_t n = n_ + o.n_;
  const double mean = mean_ + delta * double(o.n_) / double(n);
  const double m2 =
      m2_ + o.m2_ + delta * delta * double(n_) * double(o.n_) / double(n);
  n_ = n;
  mean_ = mean;
  m2_ = m2;
  mean_c_ = 0;
  m2_c_ = 0;
}

double StreamingStats::variance() const {
  return n_ > 1 ? m2_ / double(n_ - 1) : kNaN;
}

double StreamingStats::sem() const {
  return n_ > 1 ? std::sqrt(variance() / double(n_)) : kNaN;
}

Estimate StreamingStats::estimate() const {
  return Estimate::from_moments(mean(), sem(), n_);
}

SlopeFit fit_loglog(const std::vector<LogLogPoint>& points) {
  SlopeFit fit;
  for (const auto& p : points) {
    if (!(p.y > 0) || !(p.x > 0) || !std::isfinite(p.y)) {
      ++fit.dropped;
      continue;
    }
    const double rel = (p.y_sem > 0 && std::isfinite(p.y_sem))
                           ? p.y_sem / p.y
                           : 1e-12;
    fit.log_x.push_back(std::log(p.x));
    fit.log_y.push_back(std::log(p.y));
    fit.weight.push_back(1.0 / (rel * rel));
  }
  fit.points_used = static_cast<int>(fit.log_x.size());
  if (fit.points_used < 2) return fit;

  double sw = 0, swx = 0, swy = 0;
  for (int i = 0; i < fit.points_used; ++i) {
    sw += fit.weight[i];
    swx += fit.weight[i] * fit.log_x[i];
    swy += fit.weight[i] * fit.log_y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < fit.points_used; ++i) {
    const double dx = fit.log_x[i] - xbar;
    const double dy = fit.log_y[i] - ybar;
    sxx += fit.weight[i] * dx * dx;
    sxy += fit.weight[i] * dx * dy;
    syy += fit.weight[i] * dy * dy;
  }
  if (!(sxx > 0)) return fit;  // all abscissas equal
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  // stderr from the propagated per-point sems (weights are 1/sigma_i^2)
  fit.slope_stderr = std::sqrt(1.0 / sxx);
  fit.r_squared = (syy > 0) ? (sxy * sxy) / (sxx * syy) : kNaN;
  return fit;
}

double z_score(const Estimate& a, const Estimate& b) {
  const double se = std::sqrt(a.sem * a.sem + b.sem * b.sem);
  if (!(se > 0)) return kNaN;
  return (a.mean - b.mean) / se;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - double(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace gfflab::stats
