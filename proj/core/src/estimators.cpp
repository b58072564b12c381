#include "gfflab/estimators.hpp"

#include <atomic>
#include <cmath>

#include "gfflab/errors.hpp"
#include "gfflab/parallel.hpp"

namespace gfflab::estimators {

using gff::FieldSample;
using gff::PrefixRejector;
using lattice::BoxGeom;
using metric::LazyOpening;
using perc::ClusterExplorer;
using perc::ExploreOptions;
using stats::Estimate;

int pick_prefix_radius(const BoxGeom& box, int n_anchors) {
  constexpr double kColumnBudgetBytes = 1.3e9;
  const double v = static_cast<double>(box.vertex_count());
  for (int rp = std::min(2, box.radius()); rp >= 1; --rp) {
    double core = 1, shell_base = 1;
    for (int j = 0; j < box.dim(); ++j) core *= (2 * rp - 1);
    for (int j = 0; j + 1 < box.dim(); ++j) shell_base *= (2 * rp - 1);
    const double cols = core + 2.0 * box.dim() * shell_base;
    if (n_anchors * cols * v * 8.0 <= kColumnBudgetBytes) return rp;
  }
  return 0;
}

namespace {

int cluster_max_linf(const BoxGeom& box,
                     const std::vector<std::int64_t>& cluster) {
  int m = -1;
  for (std::int64_t v : cluster) m = std::max(m, box.linf(v));
  return m;
}

}  // namespace

OneArmTable estimate_one_arm(int d, double h, const std::vector<int>& N_list,
                             std::uint64_t reps, std::uint64_t seed,
                             int workers) {
  OneArmTable table;
  table.d = d;
  table.level = h;
  table.reps = reps;
  for (std::size_t row = 0; row < N_list.size(); ++row) {
    const int N = N_list[row];
    if (N < 1) throw std::domain_error("estimate_one_arm: N >= 1 required");
    const BoxGeom box(d, N);
    PrefixRejector rej(box, {Point::origin(d)}, pick_prefix_radius(box));
    const std::int64_t origin = box.index(Point::origin(d));

    struct Acc {
      std::uint64_t succ = 0, n = 0;
    };
    auto accs = par::run_chunked<Acc>(
        reps, workers, [&](std::uint64_t rep, Acc& a) {
          const std::uint64_t stream = replicate_stream(row, rep);
          auto s1 = rej.stage1(h, seed, stream);
          bool arm = false;
          if (s1.confined[0]) {
            arm = cluster_max_linf(box, s1.cluster[0]) >= N;
          } else {
            FieldSample f = rej.complete(seed, stream, s1);
            LazyOpening lazy(f, h, seed, stream);
            auto res = perc::thread_local_explorer(box).explore(
                lazy, origin, ExploreOptions{.stop_at_linf = N});
            arm = res.reached_linf;
          }
          a.succ += arm ? 1 : 0;
          ++a.n;
        });
    std::uint64_t succ = 0, n = 0;
    for (const auto& a : accs) {
      succ += a.succ;
      n += a.n;
    }
    table.rows.push_back({N, Estimate::from_proportion(succ, n)});
  }
  std::vector<stats::LogLogPoint> pts;
  for (const auto& r : table.rows) {
    pts.push_back({double(r.N), r.theta.mean, r.theta.sem});
  }
  table.fit = stats::fit_loglog(pts);
  return table;
}

Estimate estimate_crossing(int d, int n, int N, std::uint64_t reps,
                           std::uint64_t seed, int workers) {
  const lattice::Annulus ann(n, N);  // validates 1 <= n < N
  const BoxGeom box(d, N);
  gff::thread_local_spectral(box);
  std::vector<std::int64_t> sources;
  const BoxGeom inner(d, n);
  sources.reserve(inner.vertex_count());
  for (std::int64_t k = 0; k < inner.vertex_count(); ++k) {
    sources.push_back(box.index(inner.point(k)));
  }
  struct Acc {
    std::uint64_t succ = 0, n = 0;
  };
  auto accs = par::run_chunked<Acc>(
      reps, workers, [&](std::uint64_t rep, Acc& a) {
        const std::uint64_t stream = replicate_stream(0, rep);
        FieldSample f = gff::thread_local_spectral(box).sample(seed, stream);
        LazyOpening lazy(f, 0.0, seed, stream);
        auto res = perc::thread_local_explorer(box).explore_from_set(
            lazy, sources, ExploreOptions{.stop_at_linf = N});
        a.succ += res.reached_linf ? 1 : 0;
        ++a.n;
      });
  std::uint64_t succ = 0, total = 0;
  for (const auto& a : accs) {
    succ += a.succ;
    total += a.n;
  }
  return Estimate::from_proportion(succ, total);
}

VolumeTailTable estimate_volume_tail(int d,
                                     const std::vector<std::int64_t>& M_list,
                                     int box_radius, std::uint64_t reps,
                                     std::uint64_t seed, int workers) {
  VolumeTailTable table;
  table.d = d;
  table.box_radius = box_radius;
  table.reps = reps;
  const BoxGeom box(d, box_radius);
  for (std::int64_t M : M_list) {
    if (M < 1) throw std::domain_error("estimate_volume_tail: M >= 1");
  }
  PrefixRejector rej(box, {Point::origin(d)}, pick_prefix_radius(box));
  const std::int64_t origin = box.index(Point::origin(d));
  const std::size_t nm = M_list.size();

  struct Acc {
    std::vector<std::uint64_t> succ, flip;
    std::uint64_t touched = 0, n = 0;
  };
  auto accs = par::run_chunked<Acc>(
      reps, workers, [&](std::uint64_t rep, Acc& a) {
        if (a.succ.empty()) {
          a.succ.assign(nm, 0);
          a.flip.assign(nm, 0);
        }
        const std::uint64_t stream = replicate_stream(0, rep);
        auto s1 = rej.stage1(0.0, seed, stream);
        std::vector<std::int64_t> by_linf(box_radius + 1, 0);
        bool touched = false;
        auto tally = [&](const std::vector<std::int64_t>& cluster) {
          for (std::int64_t v : cluster) ++by_linf[box.linf(v)];
          touched = cluster_max_linf(box, cluster) >= box_radius;
        };
        if (s1.confined[0]) {
          tally(s1.cluster[0]);
        } else {
          FieldSample f = rej.complete(seed, stream, s1);
          LazyOpening lazy(f, 0.0, seed, stream);
          auto res =
              perc::thread_local_explorer(box).explore(lazy, origin, {});
          tally(res.vertices);
        }
        std::vector<std::int64_t> cumlinf(box_radius + 1, 0);
        std::int64_t c = 0;
        for (int l = 0; l <= box_radius; ++l) {
          c += by_linf[l];
          cumlinf[l] = c;
        }
        for (std::size_t i = 0; i < nm; ++i) {
          const int cap =
              static_cast<int>(std::min<std::int64_t>(M_list[i], box_radius));
          const bool ge = cumlinf[cap] >= M_list[i];
          a.succ[i] += ge ? 1 : 0;
          if (touched && !ge) ++a.flip[i];
        }
        a.touched += touched ? 1 : 0;
        ++a.n;
      });

  std::vector<std::uint64_t> succ(nm, 0), flip(nm, 0);
  std::uint64_t touched = 0, total = 0;
  for (const auto& a : accs) {
    if (!a.succ.empty()) {
      for (std::size_t i = 0; i < nm; ++i) {
        succ[i] += a.succ[i];
        flip[i] += a.flip[i];
      }
    }
    touched += a.touched;
    total += a.n;
  }
  std::vector<stats::LogLogPoint> pts;
  for (std::size_t i = 0; i < nm; ++i) {
    VolumeTailRow row;
    row.M = M_list[i];
    row.nu = Estimate::from_proportion(succ[i], total);
    row.censored_fraction = total ? double(flip[i]) / double(total) : 0.0;
    table.rows.push_back(row);
    pts.push_back({double(row.M), row.nu.mean, row.nu.sem});
  }
  table.boundary_touch_fraction =
      total ? double(touched) / double(total) : 0.0;
  table.censor_warning =
      !table.rows.empty() && table.rows.back().censored_fraction > 0.05;
  table.fit = stats::fit_loglog(pts);
  return table;
}

ConditionalArmStudy conditional_arm_study(int d, int M, int N,
                                          const std::vector<Point>& ys,
                                          std::uint64_t accepted_target,
                                          std::uint64_t seed, int workers) {
  if (M < 0 || N < 1 || M > N) {
    throw std::domain_error("conditional_arm_study: bad scales");
  }
  const BoxGeom box(d, N);
  PrefixRejector rej(box, {Point::origin(d)}, pick_prefix_radius(box));
  const std::int64_t origin = box.index(Point::origin(d));
  std::vector<std::int64_t> y_idx;
  for (const Point& y : ys) y_idx.push_back(box.index(y));

  std::atomic<std::uint64_t> attempts_total{0}, accepted_total{0};

  struct Acc {
    std::vector<std::int64_t> volumes;
    std::vector<std::uint64_t> y_hits;
    std::uint64_t attempts = 0;
  };
  auto accs = par::run_chunked<Acc>(
      accepted_target, workers, [&](std::uint64_t rep, Acc& a) {
        if (a.y_hits.empty()) a.y_hits.assign(y_idx.size(), 0);
        for (std::uint64_t attempt = 0;; ++attempt) {
          if (attempt >= (1u << 20)) {
            throw CapacityError(
                "conditional_arm_study: attempt budget exhausted");
          }
          const std::uint64_t at = ++attempts_total;
          ++a.attempts;
          const std::uint64_t stream = replicate_stream(0, rep, attempt);
          auto s1 = rej.stage1(0.0, seed, stream);
          std::vector<std::int64_t> cluster;
          bool arm = false;
          if (s1.confined[0]) {
            arm = cluster_max_linf(box, s1.cluster[0]) >= N;
            if (arm) cluster = s1.cluster[0];
          } else {
            FieldSample f = rej.complete(seed, stream, s1);
            LazyOpening lazy(f, 0.0, seed, stream);
            auto res =
                perc::thread_local_explorer(box).explore(lazy, origin, {});
            arm = res.max_linf >= N;
            if (arm) cluster = std::move(res.vertices);
          }
          if (!arm) {
            if (at > 200000 && accepted_total.load() * 10000 < at) {
              throw AcceptanceError(
                  "conditional_arm_study: acceptance below 1e-4", at,
                  accepted_total.load());
            }
            continue;
          }
          ++accepted_total;
          std::int64_t vol = 0;
          for (std::int64_t v : cluster) {
            if (box.linf(v) <= M) ++vol;
          }
          a.volumes.push_back(vol);
          for (std::size_t i = 0; i < y_idx.size(); ++i) {
            for (std::int64_t v : cluster) {
              if (v == y_idx[i]) {
                ++a.y_hits[i];
                break;
              }
            }
          }
          return;
        }
      });

  ConditionalArmStudy study;
  auto& vol = study.volume;
  vol.d = d;
  vol.M = M;
  vol.N = N;
  std::vector<std::uint64_t> y_hits(y_idx.size(), 0);
  for (const auto& a : accs) {
    vol.attempts += a.attempts;
    for (std::int64_t v : a.volumes) vol.volumes.push_back(v);
    for (std::size_t i = 0; i < a.y_hits.size(); ++i) y_hits[i] += a.y_hits[i];
  }
  vol.accepted = vol.volumes.size();
  std::vector<double> vd(vol.volumes.begin(), vol.volumes.end());
  vol.median = stats::quantile(vd, 0.5);
  vol.q1 = stats::quantile(vd, 0.25);
  vol.q3 = stats::quantile(vd, 0.75);
  const double growth = std::pow(double(M), std::min(0.5 * d + 1.0, 4.0));
  const double lambdas[3] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    std::uint64_t c = 0;
    for (std::int64_t v : vol.volumes) {
      if (double(v) >= lambdas[i] * growth) ++c;
    }
    vol.tail_at_lambda[i] = Estimate::from_proportion(c, vol.accepted);
  }
  std::uint64_t c2 = 0;
  for (std::int64_t v : vol.volumes) {
    if (double(v) >= 2.0 * vol.median) ++c2;
  }
  vol.p_ge_twice_median = Estimate::from_proportion(c2, vol.accepted);

  for (std::size_t i = 0; i < ys.size(); ++i) {
    ConditionalTwoPointResult r;
    r.d = d;
    r.M = M;
    r.N = N;
    r.y = ys[i];
    r.p = Estimate::from_proportion(y_hits[i], vol.accepted);
    r.attempts = vol.attempts;
    study.two_point.push_back(std::move(r));
  }
  return study;
}

ConditionalVolumeSummary estimate_conditional_volume(
    int d, int M, int N, std::uint64_t accepted_target, std::uint64_t seed,
    int workers) {
  if (N < 4 * M) {
    throw std::domain_error("estimate_conditional_volume: requires N >= 4M");
  }
  return conditional_arm_study(d, M, N, {}, accepted_target, seed, workers)
      .volume;
}

ConditionalTwoPointResult estimate_conditional_two_point(
    int d, int M, const Point& y, int N, std::uint64_t accepted_target,
    std::uint64_t seed, int workers) {
  if (N < 4 * M) {
    throw std::domain_error(
        "estimate_conditional_two_point: requires N >= 4M");
  }
  return conditional_arm_study(d, M, N, {y}, accepted_target, seed, workers)
      .two_point.front();
}

ArcsinReport estimate_arcsin(int d, int box_radius,
                             const std::vector<std::pair<Point, Point>>& pairs,
                             std::uint64_t reps, std::uint64_t seed,
                             int workers) {
  ArcsinReport report;
  report.d = d;
  report.box_radius = box_radius;
  report.reps = reps;
  const BoxGeom box(d, box_radius);
  const Point origin = Point::origin(d);
  for (const auto& [x, y] : pairs) {
    if (!(x == origin)) {
      throw std::invalid_argument(
          "estimate_arcsin: pairs must be rooted at the origin");
    }
    if (!box.contains(y)) {
      throw std::domain_error("estimate_arcsin: pair outside box");
    }
  }
  greens::DirichletGreen gd(box, greens::DirichletGreen::Backend::dense);
  PrefixRejector rej(box, {origin}, pick_prefix_radius(box));
  const std::int64_t o = box.index(origin);
  std::vector<std::int64_t> y_idx;
  for (const auto& [x, y] : pairs) y_idx.push_back(box.index(y));

  struct Acc {
    std::vector<std::uint64_t> hits;
    std::uint64_t n = 0;
  };
  auto accs = par::run_chunked<Acc>(
      reps, workers, [&](std::uint64_t rep, Acc& a) {
        if (a.hits.empty()) a.hits.assign(y_idx.size(), 0);
        const std::uint64_t stream = replicate_stream(0, rep);
        auto s1 = rej.stage1(0.0, seed, stream);
        auto check = [&](const std::vector<std::int64_t>& cluster) {
          for (std::size_t i = 0; i < y_idx.size(); ++i) {
            for (std::int64_t v : cluster) {
              if (v == y_idx[i]) {
                ++a.hits[i];
                break;
              }
            }
          }
        };
        if (s1.confined[0]) {
          check(s1.cluster[0]);
        } else {
          FieldSample f = rej.complete(seed, stream, s1);
          LazyOpening lazy(f, 0.0, seed, stream);
          auto res = perc::thread_local_explorer(box).explore(lazy, o, {});
          check(res.vertices);
        }
        ++a.n;
      });

  std::vector<std::uint64_t> hits(y_idx.size(), 0);
  std::uint64_t total = 0;
  for (const auto& a : accs) {
    if (!a.hits.empty()) {
      for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += a.hits[i];
    }
    total += a.n;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ArcsinPair p;
    p.x = pairs[i].first;
    p.y = pairs[i].second;
    p.mc = Estimate::from_proportion(hits[i], total);
    const std::int64_t yi = y_idx[i];
    p.predicted = greens::arcsin_two_point(gd.entry(o, yi), gd.entry(o, o),
                                           gd.entry(yi, yi));
    p.z = (p.mc.mean - p.predicted) / p.mc.sem;
    report.pairs.push_back(std::move(p));
  }
  return report;
}

QuasiMultTable quasi_mult_ratio(int d, const std::vector<int>& N_list,
                                std::uint64_t reps, std::uint64_t seed,
                                int workers, int outer_factor) {
  if (outer_factor < 2) {
    throw std::invalid_argument(
        "quasi_mult_ratio: outer set would meet the inner scale");
  }
  QuasiMultTable table;
  table.d = d;
  table.outer_factor = outer_factor;
  for (std::size_t row = 0; row < N_list.size(); ++row) {
    const int N = N_list[row];
    if (N < 1) throw std::domain_error("quasi_mult_ratio: N >= 1");
    const int R = outer_factor * N;
    const BoxGeom box(d, R);
    PrefixRejector rej(box, {Point::origin(d)}, pick_prefix_radius(box));
    const std::int64_t origin = box.index(Point::origin(d));
    std::vector<std::int64_t> inner_shell;
    {
      const BoxGeom shell(d, N);
      perc::any_boundary_vertex(shell, [&](std::int64_t sv) {
        inner_shell.push_back(box.index(shell.point(sv)));
        return false;
      });
    }
    gff::thread_local_spectral(box);

    struct Acc {
      std::uint64_t succ[3] = {0, 0, 0};
      std::uint64_t n[3] = {0, 0, 0};
    };
    auto accs = par::run_chunked<Acc>(
        reps, workers, [&](std::uint64_t rep, Acc& a) {
          const std::uint64_t stream = replicate_stream(row, rep);
          const int third = static_cast<int>(rep % 3);
          bool succ = false;
          if (third == 2) {
            FieldSample f =
                gff::thread_local_spectral(box).sample(seed, stream);
            LazyOpening lazy(f, 0.0, seed, stream);
            auto res = perc::thread_local_explorer(box).explore_from_set(
                lazy, inner_shell, ExploreOptions{.stop_at_linf = R});
            succ = res.reached_linf;
          } else {
            const int target = third == 0 ? R : N;
            auto s1 = rej.stage1(0.0, seed, stream);
            if (s1.confined[0]) {
              succ = cluster_max_linf(box, s1.cluster[0]) >= target;
            } else {
              FieldSample f = rej.complete(seed, stream, s1);
              LazyOpening lazy(f, 0.0, seed, stream);
              auto res = perc::thread_local_explorer(box).explore(
                  lazy, origin, ExploreOptions{.stop_at_linf = target});
              succ = res.reached_linf;
            }
          }
          a.succ[third] += succ ? 1 : 0;
          ++a.n[third];
        });

    std::uint64_t succ[3] = {0, 0, 0}, n[3] = {0, 0, 0};
    for (const auto& a : accs) {
      for (int t = 0; t < 3; ++t) {
        succ[t] += a.succ[t];
        n[t] += a.n[t];
      }
    }
    QuasiMultRow qr;
    qr.N = N;
    qr.p_joint = Estimate::from_proportion(succ[0], n[0]);
    qr.p_arm1 = Estimate::from_proportion(succ[1], n[1]);
    qr.p_arm2 = Estimate::from_proportion(succ[2], n[2]);
    const double corr = d > 6 ? std::pow(double(N), 6.0 - d) : 1.0;
    if (qr.p_joint.mean > 0 && qr.p_arm1.mean > 0 && qr.p_arm2.mean > 0) {
      qr.ratio = qr.p_joint.mean / (corr * qr.p_arm1.mean * qr.p_arm2.mean);
      const double rel =
          std::sqrt(std::pow(qr.p_joint.sem / qr.p_joint.mean, 2) +
                    std::pow(qr.p_arm1.sem / qr.p_arm1.mean, 2) +
                    std::pow(qr.p_arm2.sem / qr.p_arm2.mean, 2));
      qr.ratio_sem = qr.ratio * rel;
    }
    table.rows.push_back(std::move(qr));
  }
  return table;
}

}  // namespace gfflab::estimators
