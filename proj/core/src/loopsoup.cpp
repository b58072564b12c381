#include "gfflab/loopsoup.hpp"

#include <algorithm>
#include <cmath>

#include "gfflab/errors.hpp"
#include "gfflab/estimators.hpp"
#include "gfflab/metric_graph.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/prefix_sampler.hpp"
#include "gfflab/rng.hpp"

namespace gfflab::loop {

LoopMeasure::LoopMeasure(const BoxGeom& box, int k_max)
    : box_(box), k_max_(k_max), n_(box.vertex_count()) {
  if (k_max < 2) throw std::domain_error("LoopMeasure: k_max >= 2");
  if (n_ > kSamplingVertexLimit) {
    throw CapacityError(
        "LoopMeasure: box exceeds the stored-powers limit of " +
        std::to_string(kSamplingVertexLimit) + " vertices");
  }
  const double w = 1.0 / (2.0 * box_.dim());
  powers_.resize(k_max_ + 1);
  powers_[1].assign(n_ * n_, 0.0);
  std::vector<std::int64_t> nbrs;
  for (std::int64_t i = 0; i < n_; ++i) {
    box_.neighbor_indices(i, nbrs);
    for (std::int64_t j : nbrs) powers_[1][i * n_ + j] = w;
  }
  for (int k = 2; k <= k_max_; ++k) {
    powers_[k].assign(n_ * n_, 0.0);
    const auto& a = powers_[k - 1];
    const auto& p = powers_[1];
    auto& out = powers_[k];
    for (std::int64_t i = 0; i < n_; ++i) {
      for (std::int64_t l = 0; l < n_; ++l) {
        const double av = a[i * n_ + l];
        if (av == 0.0) continue;
        const double* prow = &p[l * n_];
        double* orow = &out[i * n_];
        for (std::int64_t j = 0; j < n_; ++j) orow[j] += av * prow[j];
      }
    }
  }
}

double LoopMeasure::q(int k, std::int64_t x, std::int64_t y) const {
  if (k == 0) return x == y ? 1.0 : 0.0;
  return powers_[k][x * n_ + y];
}

double LoopMeasure::bucket_mass(std::int64_t x, int k) const {
  return q(k, x, x) / double(k);
}

double LoopMeasure::residual_mass_bound() const {
  const double rho = std::cos(M_PI / (box_.side() + 1));
  const int k = k_max_;
  return double(n_) * std::pow(rho, k + 1) / ((k + 1) * (1.0 - rho));
}

double LoopMeasure::occupation_mean(std::int64_t x) const {
  double s = 0;
  for (int k = 2; k <= k_max_; ++k) s += q(k, x, x);
  return s;
}

namespace {

/// Knuth Poisson sampler; bucket means are small.
std::uint64_t poisson_draw(rng::Sequence& rs, double lambda) {
  if (lambda <= 0) return 0;
  const double limit = std::exp(-lambda);
  double prod = 1.0;
  std::uint64_t k = 0;
  while (true) {
    prod *= rs.next_uniform_pos();
    if (prod <= limit) return k;
    ++k;
  }
}

}  // namespace

LoopSoupSample sample_loop_soup(const LoopMeasure& measure, double alpha,
                                std::uint64_t seed, std::uint64_t stream,
                                double residual_tol) {
  if (alpha < 0) throw std::domain_error("sample_loop_soup: alpha >= 0");
  const BoxGeom& box = measure.box();
  LoopSoupSample s;
  s.alpha = alpha;
  s.box = box;
  s.k_max = measure.k_max();
  s.seed = seed;
  s.stream = stream;
  s.residual_mass_bound = measure.residual_mass_bound();
  if (alpha * s.residual_mass_bound > residual_tol) {
    throw ConfigError(
        "sample_loop_soup: truncation residual bound " +
        std::to_string(alpha * s.residual_mass_bound) + " exceeds " +
        std::to_string(residual_tol) + "; raise k_max");
  }
  if (alpha == 0) return s;
  const std::int64_t n = box.vertex_count();
  std::vector<std::int64_t> nbrs;
  for (std::int64_t x = 0; x < n; ++x) {
    for (int k = 2; k <= measure.k_max(); ++k) {
      const double lambda = alpha * measure.bucket_mass(x, k);
      const std::uint64_t bucket =
          static_cast<std::uint64_t>(x) * (measure.k_max() + 1) + k;
      rng::Sequence rs(seed, (stream << 20) | bucket,
                       rng::Domain::loop_counts);
      const std::uint64_t count = poisson_draw(rs, lambda);
      if (count == 0) continue;
      rng::Sequence shape_rs(seed, (stream << 20) | bucket,
                             rng::Domain::loop_shape);
      for (std::uint64_t c = 0; c < count; ++c) {
        // backward-kernel bridge: step to z with weight p(y,z) q_{k-j-1}(z,x)
        RootedLoop loop;
        loop.root = box.point(x);
        loop.steps.push_back(loop.root);
        std::int64_t y = x;
        for (int j = 1; j < k; ++j) {
          // choose the next vertex z with weight p(y,z) q_{k-j}(z,x); the
          // uniform transition factor cancels in the normalization
          box.neighbor_indices(y, nbrs);
          double total = 0;
          for (std::int64_t z : nbrs) total += measure.q(k - j, z, x);
          double u = shape_rs.next_uniform() * total;
          std::int64_t pick = -1;
          for (std::int64_t z : nbrs) {
            const double w = measure.q(k - j, z, x);
            if (w <= 0) continue;
            pick = z;
            u -= w;
            if (u <= 0) break;
          }
          y = pick;
          loop.steps.push_back(box.point(y));
        }
        loop.steps.push_back(loop.root);
        s.loops.push_back(std::move(loop));
      }
    }
  }
  return s;
}

LoopSoupSample sample_loop_soup(const BoxGeom& box, double alpha, int k_max,
                                std::uint64_t seed, std::uint64_t stream,
                                double residual_tol) {
  LoopMeasure measure(box, k_max);
  return sample_loop_soup(measure, alpha, seed, stream, residual_tol);
}

OccupationField occupation_field(const LoopSoupSample& sample) {
  OccupationField f;
  f.box = sample.box;
  f.visits.assign(sample.box.vertex_count(), 0);
  for (const RootedLoop& loop : sample.loops) {
    for (int j = 0; j < loop.length(); ++j) {
      ++f.visits[sample.box.index(loop.steps[j])];
      ++f.total;
    }
  }
  return f;
}

perc::ClusterLabeling loop_clusters(const LoopSoupSample& sample) {
  const BoxGeom& box = sample.box;
  const std::int64_t n = box.vertex_count();
  perc::UnionFind uf(n);
  std::vector<char> visited(n, 0);
  for (const RootedLoop& loop : sample.loops) {
    std::int64_t prev = -1;
    for (const Point& p : loop.steps) {
      const std::int64_t v = box.index(p);
      visited[v] = 1;
      if (prev >= 0) uf.unite(static_cast<int>(prev), static_cast<int>(v));
      prev = v;
    }
  }
  perc::ClusterLabeling lab;
  lab.box = box;
  lab.level = 0;
  lab.root.resize(n);
  lab.size.assign(n, 0);
  for (std::int64_t v = 0; v < n; ++v) {
    if (!visited[v]) {
      lab.root[v] = -1;
      continue;
    }
    const int r = uf.find(static_cast<int>(v));
    lab.root[v] = r;
    ++lab.size[r];
  }
  return lab;
}

bool SignOpening::edge_open(std::int64_t low, int axis) const {
  const double a = field_.values[low];
  const double b = field_.values[low + field_.box.stride(axis)];
  if ((a >= 0) != (b >= 0)) return false;  // sign change cuts the edge
  const std::int64_t id = field_.box.edge_id(low, axis);
  const double u = rng::uniform_at(seed_, stream_, rng::Domain::edge_uniforms,
                                   static_cast<std::uint64_t>(id));
  return u < metric::bridge_open_prob(std::abs(a), std::abs(b), 0.0,
                                      field_.box.dim());
}

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return stats::kNaN;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double dmax = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    dmax = std::max(dmax, std::abs(double(i) / a.size() -
                                   double(j) / b.size()));
  }
  const double ne =
      double(a.size()) * b.size() / double(a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * dmax;
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda *
                                                    lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

SignClusterReport sign_cluster_equivalence(int d, int N, std::uint64_t reps,
                                           std::uint64_t seed, int workers) {
  SignClusterReport rep;
  rep.d = d;
  rep.N = N;
  rep.reps = reps;
  rep.vol_thresholds = {4, 16, 64};
  const BoxGeom box(d, N);
  const std::int64_t origin = box.index(Point::origin(d));
  gff::PrefixRejector rej(box, {Point::origin(d)},
                          estimators::pick_prefix_radius(box));
  gff::thread_local_spectral(box);

  const std::size_t nt = rep.vol_thresholds.size();
  struct Acc {
    std::uint64_t level_arm = 0, sign_arm = 0, n_level = 0, n_sign = 0;
    std::vector<std::uint64_t> level_vol, sign_vol;
    std::vector<double> pos_sizes, neg_sizes;
  };
  auto accs = par::run_chunked<Acc>(
      reps, workers, [&](std::uint64_t rep_i, Acc& a) {
        if (a.level_vol.empty()) {
          a.level_vol.assign(nt, 0);
          a.sign_vol.assign(nt, 0);
        }
        // independent halves: level estimates on even, sign on odd streams
        if (rep_i % 2 == 0) {
          const std::uint64_t stream =
              estimators::replicate_stream(0, rep_i);
          auto s1 = rej.stage1(0.0, seed, stream);
          std::int64_t vol = 0;
          bool arm = false;
          if (s1.confined[0]) {
            vol = static_cast<std::int64_t>(s1.cluster[0].size());
          } else {
            auto f = rej.complete(seed, stream, s1);
            metric::LazyOpening lazy(f, 0.0, seed, stream);
            auto res =
                perc::thread_local_explorer(box).explore(lazy, origin, {});
            vol = static_cast<std::int64_t>(res.vertices.size());
            arm = res.max_linf >= N;
          }
          a.level_arm += arm ? 1 : 0;
          for (std::size_t t = 0; t < nt; ++t) {
            a.level_vol[t] += vol >= rep.vol_thresholds[t] ? 1 : 0;
          }
          ++a.n_level;
        } else {
          const std::uint64_t stream =
              estimators::replicate_stream(1, rep_i);
          auto f = gff::thread_local_spectral(box).sample(seed, stream);
          SignOpening opening(f, seed, stream);
          auto res =
              perc::thread_local_explorer(box).explore(opening, origin, {});
          const std::int64_t vol =
              static_cast<std::int64_t>(res.vertices.size());
          a.sign_arm += res.max_linf >= N ? 1 : 0;
          for (std::size_t t = 0; t < nt; ++t) {
            a.sign_vol[t] += vol >= rep.vol_thresholds[t] ? 1 : 0;
          }
          if (f.values[origin] >= 0) {
            a.pos_sizes.push_back(double(vol));
          } else {
            a.neg_sizes.push_back(double(vol));
          }
          ++a.n_sign;
        }
      });

  Acc total;
  total.level_vol.assign(nt, 0);
  total.sign_vol.assign(nt, 0);
  for (const auto& a : accs) {
    if (a.level_vol.empty()) continue;
    total.level_arm += a.level_arm;
    total.sign_arm += a.sign_arm;
    total.n_level += a.n_level;
    total.n_sign += a.n_sign;
    for (std::size_t t = 0; t < nt; ++t) {
      total.level_vol[t] += a.level_vol[t];
      total.sign_vol[t] += a.sign_vol[t];
    }
    total.pos_sizes.insert(total.pos_sizes.end(), a.pos_sizes.begin(),
                           a.pos_sizes.end());
    total.neg_sizes.insert(total.neg_sizes.end(), a.neg_sizes.begin(),
                           a.neg_sizes.end());
  }
  rep.level_arm =
      stats::Estimate::from_proportion(total.level_arm, total.n_level);
  rep.sign_arm =
      stats::Estimate::from_proportion(total.sign_arm, total.n_sign);
  {
    const double diff = rep.level_arm.mean - 0.5 * rep.sign_arm.mean;
    const double se = std::sqrt(rep.level_arm.sem * rep.level_arm.sem +
                                0.25 * rep.sign_arm.sem * rep.sign_arm.sem);
    rep.factor2_z = diff / se;
  }
  rep.ks_p_sign_symmetry = ks_two_sample_p(total.pos_sizes, total.neg_sizes);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto lv =
        stats::Estimate::from_proportion(total.level_vol[t], total.n_level);
    const auto sv =
        stats::Estimate::from_proportion(total.sign_vol[t], total.n_sign);
    const double diff = lv.mean - 0.5 * sv.mean;
    const double se =
        std::sqrt(lv.sem * lv.sem + 0.25 * sv.sem * sv.sem);
    rep.volume_factor2_z.push_back(diff / se);
  }
  return rep;
}

}  // namespace gfflab::loop
