#include "gfflab/metric_graph.hpp"

#include <cmath>
#include <stdexcept>

namespace gfflab::metric {

double bridge_open_prob(double a, double b, double h, int d) {
  if (d < 3) throw std::domain_error("bridge_open_prob: requires d >= 3");
  if (a < h || b < h) return 0.0;
  // Hit probability of level h for a bridge over an interval of length L
  // driven by variance-sigma^2 motion is exp(-2(a-h)(b-h)/(sigma^2 L));
  // sigma^2 = 2 and L = d give exp(-(a-h)(b-h)/d).
  return -std::expm1(-(a - h) * (b - h) / d);
}

stats::Estimate bridge_hit_oracle(double a, double b, double h, int d,
                                  int steps, std::uint64_t reps,
                                  std::uint64_t seed) {
  if (steps < 100) throw std::domain_error("bridge_hit_oracle: steps < 100");
  if (reps < 1000) throw std::domain_error("bridge_hit_oracle: reps < 1000");
  if (a < h || b < h) return stats::Estimate::from_proportion(0, reps);

  // pinned walk: given value v at step i (of `steps`), the next value is
  // N(v + (b - v)/(steps - i), 2*(d/steps)*(steps - i - 1)/(steps - i))
  const double dt_var = 2.0 * (double(d) / steps);
  std::uint64_t hits = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    rng::Sequence rs(seed, r, rng::Domain::bridge_oracle);
    double v = a;
    bool above = true;
    for (int i = 0; i < steps - 1; ++i) {
      const double remaining = steps - i;
      const double mean = v + (b - v) / remaining;
      const double var = dt_var * (remaining - 1.0) / remaining;
      v = mean + std::sqrt(var) * rs.next_normal();
      if (v <= h) {
        above = false;
        break;
      }
    }
    if (above) ++hits;
  }
  return stats::Estimate::from_proportion(hits, reps);
}

LevelSetGraph open_level_set(const FieldSample& field, double h,
                             std::uint64_t seed, std::uint64_t stream) {
  const BoxGeom& box = field.box;
  const int d = box.dim();
  const std::int64_t n = box.vertex_count();
  LevelSetGraph g;
  g.box = box;
  g.level = h;
  g.seed = seed;
  g.stream = stream;
  g.active.resize(n);
  g.open.assign(box.edge_count(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    g.active[i] = field.values[i] >= h ? 1 : 0;
  }
  const LazyOpening lazy(field, h, seed, stream);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!g.active[i]) continue;
    for (int j = 0; j < d; ++j) {
      const std::int64_t id = box.edge_id(i, j);
      if (id < 0) continue;
      if (lazy.edge_open(i, j)) g.open[id] = 1;
    }
  }
  return g;
}

LevelSetGraph open_level_set(const FieldSample& field, std::uint64_t seed,
                             std::uint64_t stream) {
  return open_level_set(field, field.level, seed, stream);
}

}  // namespace gfflab::metric
