#include "gfflab/capacity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <unordered_set>

#include "gfflab/errors.hpp"
#include "gfflab/rng.hpp"

namespace gfflab::cap {

namespace {

double pair_green(const FreeGreenTable& green, const Point& a,
                  const Point& b) {
  int abs_dx[lattice::kMaxDim];
  bool in_range = true;
  for (int j = 0; j < a.dim(); ++j) {
    abs_dx[j] = std::abs(a[j] - b[j]);
    if (abs_dx[j] > green.range()) in_range = false;
  }
  if (in_range) return green.at_abs(abs_dx);
  Point d = a - b;
  return greens::free_green_bessel(green.dim(), d);
}

std::uint64_t pack_key(const Point& p) {
  std::uint64_t k = 0;
  for (int j = 0; j < p.dim(); ++j) {
    k = (k << 16) | static_cast<std::uint16_t>(p[j] + 32000);
  }
  return k;
}

}  // namespace

EquilibriumMeasure equilibrium(const std::vector<Point>& vertex_set,
                               const FreeGreenTable& green) {
  const std::size_t n = vertex_set.size();
  if (n == 0) throw std::domain_error("equilibrium: empty set");
  if (n > kEquilibriumDenseLimit) {
    throw CapacityError("equilibrium: set exceeds the dense limit of " +
                        std::to_string(kEquilibriumDenseLimit));
  }
  {
    std::set<Point> dedup(vertex_set.begin(), vertex_set.end());
    if (dedup.size() != n) {
      throw std::domain_error("equilibrium: duplicate points (singular)");
    }
  }
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = pair_green(green, vertex_set[i], vertex_set[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("equilibrium: Green matrix not positive definite");
  }
  Eigen::VectorXd q = llt.solve(Eigen::VectorXd::Ones(n));
  EquilibriumMeasure em;
  em.points = vertex_set;
  em.weights.resize(n);
  em.min_raw_weight = 0;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    em.min_raw_weight = std::min(em.min_raw_weight, q[i]);
    em.weights[i] = std::max(0.0, q[i]);
    total += q[i];
  }
  em.total = total;
  return em;
}

HittingEstimate hitting_probability_mc(const Point& from,
                                       const std::vector<Point>& target,
                                       const FreeGreenTable& green,
                                       double kill_radius, std::uint64_t walks,
                                       std::uint64_t seed) {
  const int d = green.dim();
  std::unordered_set<std::uint64_t> tset;
  tset.reserve(target.size() * 2);
  for (const Point& p : target) tset.insert(pack_key(p));

  std::uint64_t hits = 0;
  std::vector<Point> exits;
  const double kill2 = kill_radius * kill_radius;
  Point pos = from;
  for (std::uint64_t w = 0; w < walks; ++w) {
    rng::Sequence rs(seed, w, rng::Domain::walk_steps);
    pos = from;
    while (true) {
      if (tset.count(pack_key(pos))) {
        ++hits;
        break;
      }
      if (pos.norm2() > kill2) {
        exits.push_back(pos);
        break;
      }
      const int s = static_cast<int>(rs.next_u64() % (2ull * d));
      pos[s >> 1] += (s & 1) ? 1 : -1;
    }
  }
  // mean Green value from the start (resp. the sampled exits) into the
  // target; the escaped-return mass forms a geometric series in their ratio
  auto mean_green_to_target = [&](const std::vector<Point>& sources) {
    if (sources.empty() || target.empty()) return 0.0;
    // subsample the target for cost control
    const std::size_t stride = std::max<std::size_t>(1, target.size() / 64);
    double s = 0;
    std::size_t cnt = 0;
    for (const Point& src : sources) {
      for (std::size_t i = 0; i < target.size(); i += stride) {
        s += pair_green(green, src, target[i]);
        ++cnt;
      }
    }
    return s / double(cnt);
  };
  HittingEstimate he;
  he.walks = walks;
  he.raw = double(hits) / double(walks);
  const double g_from = mean_green_to_target({from});
  std::vector<Point> exit_sample;
  for (std::size_t i = 0; i < exits.size();
       i += std::max<std::size_t>(1, exits.size() / 128)) {
    exit_sample.push_back(exits[i]);
  }
  const double g_exit = mean_green_to_target(exit_sample);
  // p = raw + (1 - raw) * p * g_exit / g_from  =>  solve for p
  const double denom = 1.0 - (1.0 - he.raw) * (g_from > 0 ? g_exit / g_from : 0);
  he.p = denom > 0 ? he.raw / denom : he.raw;
  const double raw_sem =
      std::sqrt(he.raw * (1.0 - he.raw) / double(walks));
  he.sem = denom > 0 ? raw_sem / denom : raw_sem;
  return he;
}

CapacityEstimate capacity_of(const std::vector<Point>& vertex_set,
                             const FreeGreenTable& green, std::uint64_t seed,
                             std::uint64_t walks) {
  CapacityEstimate ce;
  if (vertex_set.empty()) return ce;
  if (vertex_set.size() <= kEquilibriumDenseLimit) {
    ce.value = equilibrium(vertex_set, green).total;
    return ce;
  }
  // Monte Carlo hitting estimator: start on a far sphere around the set's
  // centroid, kill beyond a larger radius, restore the return mass through
  // Green ratios. cap ~ P_w(hit) / sphere-averaged Green value.
  const int d = green.dim();
  Point centroid = Point::origin(d);
  {
    std::vector<double> c(d, 0);
    for (const Point& p : vertex_set) {
      for (int j = 0; j < d; ++j) c[j] += p[j];
    }
    for (int j = 0; j < d; ++j) {
      centroid[j] = static_cast<int>(std::lround(c[j] / vertex_set.size()));
    }
  }
  double r_set = 1;
  for (const Point& p : vertex_set) {
    r_set = std::max(r_set, std::sqrt((p - centroid).norm2()));
  }
  const double r_start = 4.0 * r_set;
  const double r_kill = 8.0 * r_set;
  // recenter so the sphere machinery works around the origin
  std::vector<Point> shifted;
  shifted.reserve(vertex_set.size());
  for (const Point& p : vertex_set) shifted.push_back(p - centroid);
  const std::vector<Point> sphere = lattice::euclidean_sphere(r_start, d);

  std::unordered_set<std::uint64_t> tset;
  tset.reserve(shifted.size() * 2);
  for (const Point& p : shifted) tset.insert(pack_key(p));

  std::uint64_t hits = 0;
  std::vector<Point> exits, starts;
  const double kill2 = r_kill * r_kill;
  for (std::uint64_t w = 0; w < walks; ++w) {
    rng::Sequence rs(seed, w, rng::Domain::walk_steps);
    Point pos = sphere[rs.next_u64() % sphere.size()];
    starts.push_back(pos);
    while (true) {
      if (tset.count(pack_key(pos))) {
        ++hits;
        break;
      }
      if (pos.norm2() > kill2) {
        exits.push_back(pos);
        break;
      }
      const int s = static_cast<int>(rs.next_u64() % (2ull * d));
      pos[s >> 1] += (s & 1) ? 1 : -1;
    }
  }
  const double raw = double(hits) / double(walks);
  auto mean_green = [&](const std::vector<Point>& sources) {
    const std::size_t sstr = std::max<std::size_t>(1, sources.size() / 96);
    const std::size_t tstr = std::max<std::size_t>(1, shifted.size() / 96);
    double s = 0;
    std::size_t cnt = 0;
    for (std::size_t a = 0; a < sources.size(); a += sstr) {
      for (std::size_t b = 0; b < shifted.size(); b += tstr) {
        s += pair_green(green, sources[a], shifted[b]);
        ++cnt;
      }
    }
    return cnt ? s / double(cnt) : 0.0;
  };
  const double g_start = mean_green(starts);
  const double g_exit = mean_green(exits);
  // P(hit from start sphere) ~ cap * g_start; escaped mass returns with
  // relative weight g_exit/g_start per round
  const double denom = g_start - (1.0 - raw) * g_exit;
  ce.monte_carlo = true;
  ce.walks = walks;
  ce.value = denom > 0 ? raw / denom : 0.0;
  const double raw_sem = std::sqrt(raw * (1.0 - raw) / double(walks));
  ce.sem = denom > 0 ? raw_sem / denom : 0.0;
  return ce;
}

CapacityEstimate cluster_capacity(const perc::ClusterLabeling& labeling,
                                  int cluster_id, const FreeGreenTable& green,
                                  std::uint64_t seed) {
  std::vector<Point> pts;
  if (cluster_id >= 0) {
    pts.reserve(labeling.cluster_size(cluster_id));
    for (std::int64_t v = 0; v < labeling.box.vertex_count(); ++v) {
      if (labeling.root[v] == cluster_id) pts.push_back(labeling.box.point(v));
    }
  }
  return capacity_of(pts, green, seed);
}

SubadditivityReport subadditivity_check(const std::vector<Point>& d1,
                                        const std::vector<Point>& d2,
                                        const FreeGreenTable& green) {
  std::set<Point> u(d1.begin(), d1.end());
  u.insert(d2.begin(), d2.end());
  SubadditivityReport rep;
  rep.cap_1 = equilibrium(d1, green).total;
  rep.cap_2 = equilibrium(d2, green).total;
  rep.cap_union =
      equilibrium(std::vector<Point>(u.begin(), u.end()), green).total;
  rep.tolerance = 1e-8 * (rep.cap_1 + rep.cap_2 + 1.0);
  rep.subadditive_ok = rep.cap_union <= rep.cap_1 + rep.cap_2 + rep.tolerance;
  rep.monotone_ok = rep.cap_1 <= rep.cap_union + rep.tolerance;
  return rep;
}

}  // namespace gfflab::cap
