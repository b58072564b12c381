#include "gfflab/iic.hpp"

#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gfflab/errors.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/prefix_sampler.hpp"

namespace gfflab::iic {

using estimators::replicate_stream;
using gff::PrefixRejector;
using metric::LazyOpening;
using perc::ExploreOptions;
using stats::Estimate;

Conditioning Conditioning::boundary_arm(int N) {
  Conditioning c;
  c.kind = Kind::boundary;
  c.N = N;
  return c;
}

Conditioning Conditioning::point_pair(const Point& x) {
  Conditioning c;
  c.kind = Kind::point;
  c.a = Point::origin(x.dim());
  c.b = x;
  // centered realization: shift both endpoints by -x/2
  for (int j = 0; j < x.dim(); ++j) {
    const int s = x[j] / 2;
    c.a[j] -= s;
    c.b[j] -= s;
  }
  return c;
}

Conditioning Conditioning::capacity_tail(double T) {
  Conditioning c;
  c.kind = Kind::capacity;
  c.T = T;
  return c;
}

Conditioning Conditioning::supercritical(double h, int N) {
  if (!(h > 0)) {
    throw std::domain_error("Conditioning: supercritical level must be > 0");
  }
  Conditioning c;
  c.kind = Kind::supercritical;
  c.h = h;
  c.N = N;
  return c;
}

Point Conditioning::anchor(int d) const {
  return kind == Kind::point ? a : Point::origin(d);
}

std::string Conditioning::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::boundary:
      os << "Boundary(N=" << N << ")";
      break;
    case Kind::point:
      os << "Point(" << a << "<->" << b << ")";
      break;
    case Kind::capacity:
      os << "Capacity(T=" << T << ")";
      break;
    case Kind::supercritical:
      os << "Supercritical(h=" << h << ",N=" << N << ")";
      break;
  }
  return os.str();
}

std::vector<CylinderEvent> default_battery(int d) {
  auto p = [&](std::initializer_list<int> c) {
    Point q = Point::origin(d);
    int j = 0;
    for (int v : c) {
      if (j < d) q[j] = v;
      ++j;
    }
    return q;
  };
  std::vector<CylinderEvent> battery;
  battery.push_back({{p({1, 0, 0})}, {0.0}, "e1_ge_0"});
  battery.push_back({{p({1, 0, 0})}, {1.0}, "e1_ge_1"});
  battery.push_back({{p({0, 1, 0}), p({0, 0, 1})}, {-1.0, -1.0},
                     "e2_e3_ge_m1"});
  battery.push_back({{p({1, 1, 0}), p({1, 0, 0})}, {0.0, 0.0},
                     "diag_pair_ge_0"});
  battery.push_back({{p({2, 0, 0})}, {1.0}, "2e1_ge_1"});
  battery.push_back({{p({1, 1, 1}), p({2, 2, 0})}, {-1.0, 0.0},
                     "corner_mixed"});
  return battery;
}

namespace {

/// Shared rejection machinery for the four conditionings.
class Engine {
 public:
  Engine(const Conditioning& cond, const BoxGeom& box)
      : cond_(cond), box_(box) {
    const int d = box.dim();
    std::vector<Point> anchors{cond.anchor(d)};
    if (cond.kind == Conditioning::Kind::point) anchors.push_back(cond.b);
    for (const Point& a : anchors) {
      if (!box.contains(a)) {
        throw std::domain_error("Conditioning endpoint outside box");
      }
    }
    const int rp =
        estimators::pick_prefix_radius(box, static_cast<int>(anchors.size()));
    if (cond.kind == Conditioning::Kind::point) {
      long sep = 0;
      for (int j = 0; j < d; ++j) {
        sep = std::max<long>(sep, std::abs(cond.a[j] - cond.b[j]));
      }
      if (sep <= 2 * rp + 2) {
        throw std::domain_error("point conditioning endpoints too close");
      }
    }
    if (cond.kind == Conditioning::Kind::capacity) {
      green_ = &greens::default_table(d);
      if (!(cond.T > 0)) {
        throw std::domain_error("capacity conditioning needs T > 0");
      }
    }
    if ((cond.kind == Conditioning::Kind::boundary ||
         cond.kind == Conditioning::Kind::supercritical) &&
        cond.N > box.radius()) {
      throw std::domain_error("arm scale exceeds box radius");
    }
    rej_ = std::make_unique<PrefixRejector>(box, anchors, rp);
    for (const Point& a : anchors) anchor_idx_.push_back(box.index(a));
  }

  const BoxGeom& box() const { return box_; }
  double level() const { return cond_.level(); }

  struct Outcome {
    bool accepted = false;
    FieldSample field;
    std::vector<std::int64_t> cluster;  // anchor's full cluster
  };

  /// One rejection attempt. Fills the outcome only on acceptance;
  /// `want_cluster` forces the full anchored cluster (vs early-exit).
  bool attempt(std::uint64_t seed, std::uint64_t stream, bool want_cluster,
               Outcome& out) {
    const double h = level();
    auto s1 = rej_->stage1(h, seed, stream);
    // decide on the prefix alone where possible
    bool need_full = false;
    for (std::size_t k = 0; k < anchor_idx_.size(); ++k) {
      if (!s1.confined[k]) {
        need_full = true;
        continue;
      }
      // a confined anchor decides the event for every conditioning kind
      switch (cond_.kind) {
        case Conditioning::Kind::boundary:
        case Conditioning::Kind::supercritical: {
          int ml = -1;
          for (std::int64_t v : s1.cluster[k]) {
            ml = std::max(ml, box_.linf(v));
          }
          if (ml < cond_.N) return false;
          break;  // arm satisfied inside the prefix: fall to full
        }
        case Conditioning::Kind::point:
          // the confined side cannot reach the far endpoint
          return false;
        case Conditioning::Kind::capacity: {
          if (confined_capacity(s1.cluster[k]) < cond_.T) return false;
          break;
        }
      }
    }
    // completion; acceptance is re-evaluated on the full opening (identical
    // by construction for confined-decided cases)
    out.field = rej_->complete(seed, stream, s1);
    LazyOpening lazy(out.field, h, seed, stream);
    auto& explorer = perc::thread_local_explorer(box_);
    switch (cond_.kind) {
      case Conditioning::Kind::boundary:
      case Conditioning::Kind::supercritical: {
        ExploreOptions opt;
        if (!want_cluster) opt.stop_at_linf = cond_.N;
        auto res = explorer.explore(lazy, anchor_idx_[0], opt);
        const bool arm = want_cluster ? res.max_linf >= cond_.N
                                      : res.reached_linf;
        if (!arm) return false;
        out.cluster = std::move(res.vertices);
        break;
      }
      case Conditioning::Kind::point: {
        ExploreOptions opt;
        opt.stop_at_vertex = anchor_idx_[1];
        auto res = explorer.explore(lazy, anchor_idx_[0], opt);
        if (!res.reached_vertex) return false;
        if (want_cluster) {
          res = explorer.explore(lazy, anchor_idx_[0], {});
        }
        out.cluster = std::move(res.vertices);
        break;
      }
      case Conditioning::Kind::capacity: {
        auto res = explorer.explore(lazy, anchor_idx_[0], {});
        std::vector<Point> pts;
        pts.reserve(res.vertices.size());
        for (std::int64_t v : res.vertices) pts.push_back(box_.point(v));
        const std::uint64_t mc_seed =
            rng::word_at(seed, stream, rng::Domain::resample, 0x2a);
        if (cap::capacity_of(pts, *green_, mc_seed).value < cond_.T) {
          return false;
        }
        out.cluster = std::move(res.vertices);
        break;
      }
    }
    (void)need_full;
    out.accepted = true;
    return true;
  }

 private:
  double confined_capacity(const std::vector<std::int64_t>& cluster) {
    if (cluster.empty()) return 0.0;
    if (cluster.size() == 1) {
      return 1.0 / greens::green_zero(box_.dim());
    }
    std::vector<Point> pts;
    pts.reserve(cluster.size());
    for (std::int64_t v : cluster) pts.push_back(box_.point(v));
    return cap::equilibrium(pts, greens::default_table(box_.dim())).total;
  }

  Conditioning cond_;
  BoxGeom box_;
  std::unique_ptr<PrefixRejector> rej_;
  std::vector<std::int64_t> anchor_idx_;
  const greens::FreeGreenTable* green_ = nullptr;
};

/// Rejection loop over accepted samples with the shared stream layout and
/// the 1e-4 acceptance guard.
template <class OnAccept>
std::uint64_t run_rejection(Engine& engine, std::uint64_t salt,
                            std::uint64_t accepted_target, std::uint64_t seed,
                            int workers, bool want_cluster,
                            OnAccept on_accept) {
  std::atomic<std::uint64_t> attempts_total{0}, accepted_total{0};
  struct Acc {
    std::uint64_t attempts = 0;
  };
  auto accs = par::run_chunked<Acc>(
      accepted_target, workers, [&](std::uint64_t rep, Acc& a) {
        Engine::Outcome out;
        for (std::uint64_t attempt = 0;; ++attempt) {
          if (attempt >= (1u << 20)) {
            throw AcceptanceError("rejection: attempt budget exhausted",
                                  attempts_total.load(),
                                  accepted_total.load());
          }
          const std::uint64_t at = ++attempts_total;
          ++a.attempts;
          const std::uint64_t stream = replicate_stream(salt, rep, attempt);
          if (engine.attempt(seed, stream, want_cluster, out)) {
            ++accepted_total;
            on_accept(rep, stream, out);
            return;
          }
          if (at > 200000 && accepted_total.load() * 10000 < at) {
            throw AcceptanceError("rejection: acceptance below 1e-4", at,
                                  accepted_total.load());
          }
        }
      });
  std::uint64_t attempts = 0;
  for (const auto& a : accs) attempts += a.attempts;
  return attempts;
}

CylinderTable cylinder_table_salted(const Conditioning& cond,
                                    const BoxGeom& box,
                                    const std::vector<CylinderEvent>& events,
                                    std::uint64_t accepted_target,
                                    std::uint64_t seed, int workers,
                                    std::uint64_t salt) {
  Engine engine(cond, box);
  const Point anchor = cond.anchor(box.dim());
  std::vector<std::vector<std::int64_t>> site_idx(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    if (ev.sites.size() != ev.thresholds.size()) {
      throw std::invalid_argument("cylinder event sites/thresholds mismatch");
    }
    for (const Point& s : ev.sites) {
      const Point site = s + anchor;
      if (!box.contains(site) ||
          site.linf_norm() > box.radius() - (box.radius() + 3) / 4) {
        throw std::domain_error(
            "cylinder event site too close to the killed shell");
      }
      site_idx[e].push_back(box.index(site));
    }
  }
  std::mutex mu;
  std::vector<std::uint64_t> hits(events.size(), 0);
  const std::uint64_t attempts = run_rejection(
      engine, salt, accepted_target, seed, workers, false,
      [&](std::uint64_t, std::uint64_t, const Engine::Outcome& out) {
        std::lock_guard<std::mutex> lock(mu);
        for (std::size_t e = 0; e < events.size(); ++e) {
          bool all = true;
          for (std::size_t i = 0; i < site_idx[e].size(); ++i) {
            if (out.field.values[site_idx[e][i]] < events[e].thresholds[i]) {
              all = false;
              break;
            }
          }
          hits[e] += all ? 1 : 0;
        }
      });
  CylinderTable table;
  table.cond = cond;
  table.box_radius = box.radius();
  table.accepted = accepted_target;
  table.attempts = attempts;
  table.acceptance_rate =
      attempts ? double(accepted_target) / double(attempts) : 0.0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    table.probabilities.push_back(
        Estimate::from_proportion(hits[e], accepted_target));
  }
  return table;
}

}  // namespace

ConditionedSample sample_conditioned(const Conditioning& cond,
                                     const BoxGeom& box, std::uint64_t seed,
                                     std::uint64_t stream,
                                     std::uint64_t max_attempts) {
  Engine engine(cond, box);
  Engine::Outcome out;
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt >= (1u << 20)) break;
    const std::uint64_t s = replicate_stream(0, stream, attempt);
    if (engine.attempt(seed, s, true, out)) {
      ConditionedSample cs;
      cs.field = std::move(out.field);
      cs.graph = metric::open_level_set(cs.field, cond.level(), seed, s);
      cs.labeling = perc::label_clusters(cs.graph);
      cs.attempts = attempt + 1;
      return cs;
    }
  }
  throw AcceptanceError("sample_conditioned: max_attempts exhausted (" +
                            cond.describe() + ")",
                        max_attempts, 0);
}

CylinderTable cylinder_table(const Conditioning& cond, const BoxGeom& box,
                             const std::vector<CylinderEvent>& events,
                             std::uint64_t accepted_target, std::uint64_t seed,
                             int workers) {
  return cylinder_table_salted(cond, box, events, accepted_target, seed,
                               workers, 0);
}

namespace {
bool same_kind_different_scale(const Conditioning& a, const Conditioning& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Conditioning::Kind::boundary:
      return a.N != b.N;
    case Conditioning::Kind::supercritical:
      return a.N != b.N || a.h != b.h;
    case Conditioning::Kind::capacity:
      return a.T != b.T;
    case Conditioning::Kind::point:
      return !(a.a == b.a && a.b == b.b);
  }
  return false;
}
}  // namespace

EquivalenceReport equivalence_report(
    const std::vector<std::pair<Conditioning, BoxGeom>>& setups,
    const std::vector<CylinderEvent>& battery, std::uint64_t accepted_target,
    std::uint64_t seed, int workers) {
  EquivalenceReport report;
  for (std::size_t i = 0; i < setups.size(); ++i) {
    report.tables.push_back(cylinder_table_salted(
        setups[i].first, setups[i].second, battery, accepted_target, seed,
        workers, i));
  }
  for (std::size_t i = 0; i < setups.size(); ++i) {
    for (std::size_t j = i + 1; j < setups.size(); ++j) {
      EquivalencePair pair;
      pair.i = i;
      pair.j = j;
      for (std::size_t e = 0; e < battery.size(); ++e) {
        const double z = stats::z_score(report.tables[i].probabilities[e],
                                        report.tables[j].probabilities[e]);
        pair.z.push_back(z);
        pair.max_abs_z = std::max(pair.max_abs_z, std::abs(z));
      }
      pair.flagged = pair.max_abs_z > 3.0;
      pair.trend_only =
          same_kind_different_scale(setups[i].first, setups[j].first);
      if (pair.flagged && !pair.trend_only) report.any_comparable_flag = true;
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

VolumeGrowthTable iic_volume_growth(int d, int N,
                                    const std::vector<int>& M_list,
                                    std::uint64_t accepted_target,
                                    std::uint64_t seed, int workers) {
  for (int M : M_list) {
    if (N < 4 * M) {
      throw std::domain_error("iic_volume_growth: requires N >= 4 max(M)");
    }
  }
  const BoxGeom box(d, N);
  Engine engine(Conditioning::boundary_arm(N), box);
  std::mutex mu;
  std::vector<std::vector<std::int64_t>> volumes(M_list.size());
  std::vector<std::uint64_t> y_hits(M_list.size(), 0);
  std::vector<std::int64_t> y_idx;
  for (int M : M_list) y_idx.push_back(box.index(Point::unit(d, 0, M)));
  const std::uint64_t attempts = run_rejection(
      engine, 0, accepted_target, seed, workers, true,
      [&](std::uint64_t, std::uint64_t, const Engine::Outcome& out) {
        std::lock_guard<std::mutex> lock(mu);
        for (std::size_t mi = 0; mi < M_list.size(); ++mi) {
          std::int64_t vol = 0;
          bool hit = false;
          for (std::int64_t v : out.cluster) {
            if (box.linf(v) <= M_list[mi]) ++vol;
            if (v == y_idx[mi]) hit = true;
          }
          volumes[mi].push_back(vol);
          y_hits[mi] += hit ? 1 : 0;
        }
      });
  VolumeGrowthTable table;
  table.N = N;
  for (std::size_t mi = 0; mi < M_list.size(); ++mi) {
    estimators::ConditionalVolumeSummary s;
    s.d = d;
    s.M = M_list[mi];
    s.N = N;
    s.accepted = volumes[mi].size();
    s.attempts = attempts;
    s.volumes = volumes[mi];
    std::vector<double> vd(volumes[mi].begin(), volumes[mi].end());
    s.median = stats::quantile(vd, 0.5);
    s.q1 = stats::quantile(vd, 0.25);
    s.q3 = stats::quantile(vd, 0.75);
    const double growth =
        std::pow(double(s.M), std::min(0.5 * d + 1.0, 4.0));
    const double lambdas[3] = {1.0, 2.0, 4.0};
    for (int li = 0; li < 3; ++li) {
      std::uint64_t c = 0;
      for (std::int64_t v : s.volumes) {
        if (double(v) >= lambdas[li] * growth) ++c;
      }
      s.tail_at_lambda[li] = Estimate::from_proportion(c, s.accepted);
    }
    std::uint64_t c2 = 0;
    for (std::int64_t v : s.volumes) {
      if (double(v) >= 2.0 * s.median) ++c2;
    }
    s.p_ge_twice_median = Estimate::from_proportion(c2, s.accepted);
    table.by_M.push_back(std::move(s));

    estimators::ConditionalTwoPointResult tp;
    tp.d = d;
    tp.M = M_list[mi];
    tp.N = N;
    tp.y = Point::unit(d, 0, M_list[mi]);
    tp.p = Estimate::from_proportion(y_hits[mi], volumes[mi].size());
    tp.attempts = attempts;
    table.two_point_by_M.push_back(std::move(tp));
  }
  return table;
}

stats::Estimate unique_crossing_diagnostic(int d, const Annulus& ann,
                                           std::uint64_t accepted_target,
                                           std::uint64_t seed, int workers) {
  const BoxGeom box(d, ann.outer);
  Engine engine(Conditioning::boundary_arm(ann.outer), box);
  std::mutex mu;
  std::uint64_t unique_count = 0, total = 0;
  run_rejection(
      engine, 0, accepted_target, seed, workers, true,
      [&](std::uint64_t, std::uint64_t stream, const Engine::Outcome& out) {
        // components of the cluster restricted outside B(n); count those
        // reaching the outer shell
        std::unordered_set<std::int64_t> restricted;
        for (std::int64_t v : out.cluster) {
          if (box.linf(v) > ann.inner) restricted.insert(v);
        }
        LazyOpening lazy(out.field, 0.0, seed, stream);
        std::unordered_set<std::int64_t> seen;
        int reaching = 0;
        std::vector<std::int64_t> queue;
        for (std::int64_t start : restricted) {
          if (seen.count(start)) continue;
          queue.clear();
          queue.push_back(start);
          seen.insert(start);
          bool reaches = false;
          for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::int64_t v = queue[head];
            if (box.linf(v) >= ann.outer) reaches = true;
            for (int j = 0; j < d; ++j) {
              const int c = box.coordinate(v, j);
              for (int s : {-1, +1}) {
                if (s < 0 ? c <= -box.radius() : c >= box.radius()) continue;
                const std::int64_t w = v + s * box.stride(j);
                if (!restricted.count(w) || seen.count(w)) continue;
                const std::int64_t low = s < 0 ? w : v;
                if (!lazy.edge_open(low, j)) continue;
                seen.insert(w);
                queue.push_back(w);
              }
            }
          }
          if (reaches) ++reaching;
        }
        std::lock_guard<std::mutex> lock(mu);
        unique_count += reaching == 1 ? 1 : 0;
        ++total;
      });
  return Estimate::from_proportion(unique_count, total);
}

double calibrate_capacity_threshold(int d, int N, std::uint64_t pilot_reps,
                                    std::uint64_t seed, int workers) {
  const auto pilot =
      estimators::estimate_one_arm(d, 0.0, {N}, pilot_reps, seed, workers);
  const double theta = pilot.rows[0].theta.mean;
  const double g0 = greens::green_zero(d);
  // invert the T^{-1/2} capacity tail at the measured arm probability
  return std::pow(theta * M_PI * std::sqrt(g0), -2.0);
}

}  // namespace gfflab::iic
