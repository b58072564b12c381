#include "gfflab/harmonic.hpp"

#include <cmath>
#include <unordered_map>

#include "gfflab/errors.hpp"
#include "gfflab/gff.hpp"
#include "gfflab/metric_graph.hpp"
#include "gfflab/percolation.hpp"
#include "gfflab/rng.hpp"

namespace gfflab::harm {

using lattice::BoxGeom;

ExploredCluster explore_cluster(const FieldSample& field, int n,
                                std::uint64_t seed, std::uint64_t stream) {
  const BoxGeom& box = field.box;
  if (n > box.radius()) {
    throw std::domain_error("explore_cluster: n exceeds box radius");
  }
  metric::LazyOpening lazy(field, 0.0, seed, stream);
  auto res = perc::thread_local_explorer(box).explore(
      lazy, box.index(Point::origin(box.dim())),
      perc::ExploreOptions{.restrict_radius = n});
  ExploredCluster c;
  c.d = box.dim();
  c.n = n;
  for (std::int64_t v : res.vertices) {
    c.vertices.push_back(box.point(v));
    c.values.push_back(field.values[v]);
  }
  return c;
}

namespace {

std::uint64_t pack_key(const Point& p) {
  std::uint64_t k = 0;
  for (int j = 0; j < p.dim(); ++j) {
    k = (k << 16) | static_cast<std::uint16_t>(p[j] + 32000);
  }
  return k;
}

}  // namespace

HarmonicAverage harmonic_average(const ExploredCluster& cluster, int n,
                                 int walk_reps, std::uint64_t seed) {
  if (walk_reps < 100) {
    throw std::domain_error("harmonic_average: walk_reps < 100");
  }
  if (cluster.vertices.empty()) {
    throw std::domain_error("harmonic_average: empty cluster");
  }
  const int d = cluster.d;
  const double r_sphere = double(d) * n;
  const double r_kill = 8.0 * d * n;
  const double kill2 = r_kill * r_kill;
  std::unordered_map<std::uint64_t, double> value_at;
  double max_abs = 0;
  for (std::size_t i = 0; i < cluster.vertices.size(); ++i) {
    value_at[pack_key(cluster.vertices[i])] = cluster.values[i];
    max_abs = std::max(max_abs, std::abs(cluster.values[i]));
  }
  const std::vector<Point> sphere = lattice::euclidean_sphere(r_sphere, d);

  // H_y per sphere point; variance from the per-walk values
  stats::StreamingStats all;
  double sum_hy = 0;
  std::uint64_t escapes = 0, total_walks = 0;
  for (std::size_t yi = 0; yi < sphere.size(); ++yi) {
    double hy = 0;
    for (int r = 0; r < walk_reps; ++r) {
      rng::Sequence rs(seed, (std::uint64_t(yi) << 24) | std::uint64_t(r),
                       rng::Domain::walk_steps);
      Point pos = sphere[yi];
      double val = 0;
      while (true) {
        auto it = value_at.find(pack_key(pos));
        if (it != value_at.end()) {
          val = it->second;
          break;
        }
        if (pos.norm2() > kill2) {
          ++escapes;
          break;
        }
        const int s = static_cast<int>(rs.next_u64() % (2ull * d));
        pos[s >> 1] += (s & 1) ? 1 : -1;
      }
      hy += val;
      all.add(val);
      ++total_walks;
    }
    sum_hy += hy / walk_reps;
  }
  HarmonicAverage h;
  h.value = sum_hy / double(sphere.size());
  h.sem = std::sqrt(all.variance() / double(total_walks));
  h.sphere_radius = static_cast<int>(r_sphere);
  h.walk_kill_radius = r_kill;
  // escaped walks could still have hit the cluster; bound the lost mass by
  // the Green-ratio return probability from the kill sphere
  const double g_ratio = std::pow(r_sphere / r_kill, d - 2.0);
  h.tail_bias_bound =
      (double(escapes) / double(total_walks)) * max_abs * g_ratio;
  return h;
}

HarmonicAverage harmonic_average_solve(const ExploredCluster& cluster, int n) {
  if (cluster.vertices.empty()) {
    throw std::domain_error("harmonic_average_solve: empty cluster");
  }
  const int d = cluster.d;
  const int r_kill = 8 * d * n;
  const BoxGeom box(d, r_kill);
  const std::int64_t nv = box.vertex_count();
  std::vector<char> fixed(nv, 0);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(nv);
  for (std::size_t i = 0; i < cluster.vertices.size(); ++i) {
    const std::int64_t v = box.index(cluster.vertices[i]);
    fixed[v] = 1;
    h[v] = cluster.values[i];
  }
  // Jacobi-style relaxation of the harmonic extension (diagonally dominant
  // after killing; converges geometrically at rate ~ the walk's return
  // probability). Conjugate gradients on the masked operator would also do;
  // relaxation keeps the mask trivial.
  Eigen::VectorXd next = h;
  const double w = 1.0 / (2.0 * d);
  std::vector<std::int64_t> nbrs;
  for (int sweep = 0; sweep < 4000; ++sweep) {
    double delta = 0;
    for (std::int64_t v = 0; v < nv; ++v) {
      if (fixed[v]) continue;
      double acc = 0;
      for (int j = 0; j < d; ++j) {
        const int c = box.coordinate(v, j);
        if (c > -box.radius()) acc += h[v - box.stride(j)];
        if (c < box.radius()) acc += h[v + box.stride(j)];
      }
      const double nv2 = acc * w;
      delta = std::max(delta, std::abs(nv2 - h[v]));
      h[v] = nv2;
    }
    if (delta < 1e-12) break;
  }
  const std::vector<Point> sphere =
      lattice::euclidean_sphere(double(d) * n, d);
  double sum = 0;
  for (const Point& y : sphere) sum += h[box.index(y)];
  HarmonicAverage out;
  out.value = sum / double(sphere.size());
  out.sem = 0;
  out.sphere_radius = d * n;
  out.walk_kill_radius = r_kill;
  out.tail_bias_bound = 0;
  return out;
}

Lemma21Report lemma21_check(const ExploredCluster& cluster, const Point& x,
                            std::uint64_t reps, std::uint64_t seed) {
  const int d = cluster.d;
  for (double v : cluster.values) {
    if (v < 0) {
      throw std::domain_error("lemma21_check: cluster values must be >= 0");
    }
  }
  if (x.linf_norm() <= 2 * d * cluster.n) {
    throw std::domain_error("lemma21_check: x must lie outside B(2dn)");
  }
  if (cluster.vertices.empty()) {
    throw std::domain_error("lemma21_check: empty cluster");
  }
  if (cluster.vertices.size() > 128) {
    throw CapacityError("lemma21_check: cluster too large for the "
                        "column-based conditional resampler (128 vertices)");
  }
  const int radius = static_cast<int>(x.linf_norm()) + 8;
  const BoxGeom box(d, radius);

  gff::ConditionalCompleter completer(box, cluster.vertices);
  Eigen::VectorXd fixed_values(cluster.vertices.size());
  for (std::size_t i = 0; i < cluster.values.size(); ++i) {
    fixed_values[i] = cluster.values[i];
  }
  std::vector<std::int64_t> sources;
  for (const Point& p : cluster.vertices) sources.push_back(box.index(p));
  const std::int64_t x_idx = box.index(x);

  std::uint64_t hits = 0;
  auto& explorer = perc::thread_local_explorer(box);
  for (std::uint64_t r = 0; r < reps; ++r) {
    gff::FieldSample f = completer.complete(seed, r, fixed_values);
    metric::LazyOpening lazy(f, 0.0, seed, r);
    auto res = explorer.explore_from_set(
        lazy, sources, perc::ExploreOptions{.stop_at_vertex = x_idx});
    if (res.reached_vertex) ++hits;
  }
  Lemma21Report rep;
  rep.x = x;
  rep.reps = reps;
  rep.connect = stats::Estimate::from_proportion(hits, reps);
  rep.hbar = harmonic_average_solve(cluster, cluster.n).value;
  const double pred = std::pow(std::sqrt(x.norm2()), 2.0 - d) *
                      std::pow(double(cluster.n), d - 2.0) * rep.hbar;
  rep.predictor = std::min(pred, 1.0);
  if (rep.predictor > 0) {
    rep.ratio = rep.connect.mean / rep.predictor;
    rep.ratio_sem = rep.connect.sem / rep.predictor;
  }
  return rep;
}

}  // namespace gfflab::harm
