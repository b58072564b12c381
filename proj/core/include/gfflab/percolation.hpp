#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/metric_graph.hpp"

namespace gfflab::perc {

using lattice::Annulus;
using lattice::BoxGeom;
using lattice::Point;
using metric::LazyOpening;
using metric::LevelSetGraph;

/// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::int64_t n) : parent_(n), size_(n, 1) {
    for (std::int64_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

/// Cluster labels of the active vertices; inactive vertices carry the
/// sentinel -1. Two active vertices share a label iff an open path joins
/// them; labels are root vertex indices, deterministic given the graph.
struct ClusterLabeling {
  BoxGeom box{3, 1};
  double level = 0;
  std::vector<int> root;           // per vertex, -1 when inactive
  std::vector<std::int64_t> size;  // per root vertex index (0 elsewhere)

  int label(std::int64_t v) const { return root[v]; }
  std::int64_t cluster_size(int id) const { return id >= 0 ? size[id] : 0; }
  std::int64_t active_count() const;
};

ClusterLabeling label_clusters(const LevelSetGraph& graph);

/// True iff the origin is active and its cluster meets the inner boundary of
/// B(N) for the labeling's own box.
bool one_arm(const ClusterLabeling& labeling, const BoxGeom& box);

/// True iff some cluster meets both B(ann.inner) and the shell of radius
/// ann.outer. Requires ann.outer <= box radius.
bool crossing(const ClusterLabeling& labeling, const Annulus& ann);

/// Lattice vertices of the cluster inside B(M).
std::int64_t volume_in(const ClusterLabeling& labeling, int cluster_id, int M);

/// True iff both points are active and share a cluster.
bool two_point(const ClusterLabeling& labeling, const Point& x,
               const Point& y);

/// Exploration of a single cluster against a lazy opening: visits only the
/// cluster and its closed boundary edges, so the cost is proportional to the
/// cluster, not the box. Early-exit knobs cover the one-arm and two-point
/// events. Reusable across samples (the visit marks are undone after each
/// call).
struct ExploreOptions {
  int restrict_radius = -1;  // traverse only vertices with linf <= r
  int stop_at_linf = -1;     // stop once a vertex at this linf is reached
  std::int64_t stop_at_vertex = -1;
};

class ClusterExplorer {
 public:
  explicit ClusterExplorer(const BoxGeom& box);

  using Options = ExploreOptions;

  struct Result {
    bool start_active = false;
    int max_linf = 0;
    bool reached_linf = false;
    bool reached_vertex = false;
    /// Cluster vertices in discovery order; truncated at early exit.
    std::vector<std::int64_t> vertices;
    bool complete = false;  // false when an early exit fired
  };

  /// Opening is any type with active(v) and edge_open(low_endpoint, axis);
  /// metric::LazyOpening is the usual one.
  template <class Opening>
  Result explore(const Opening& opening, std::int64_t start,
                 const Options& opt = Options()) {
    queue_.clear();
    if (opening.active(start) &&
        (opt.restrict_radius < 0 || box_.linf(start) <= opt.restrict_radius)) {
      queue_.push_back(start);
      visited_[start] = 1;
    }
    return run(opening, opt);
  }

  /// Multi-source exploration of the union of clusters of the active
  /// vertices in `starts`; used for annulus-crossing events.
  template <class Opening>
  Result explore_from_set(const Opening& opening,
                          const std::vector<std::int64_t>& starts,
                          const Options& opt = Options()) {
    queue_.clear();
    for (std::int64_t s : starts) {
      if (visited_[s]) continue;
      if (!opening.active(s)) continue;
      if (opt.restrict_radius >= 0 && box_.linf(s) > opt.restrict_radius) {
        continue;
      }
      visited_[s] = 1;
      queue_.push_back(s);
    }
    return run(opening, opt);
  }

 private:
  template <class Opening>
  Result run(const Opening& opening, const Options& opt) {
    Result res;
    if (queue_.empty()) return res;
    res.start_active = true;
    res.max_linf = 0;
    const int d = box_.dim();
    bool stopped = false;
    for (std::size_t head = 0; head < queue_.size() && !stopped; ++head) {
      const std::int64_t v = queue_[head];
      const int vlinf = box_.linf(v);
      res.max_linf = std::max(res.max_linf, vlinf);
      if (opt.stop_at_linf >= 0 && vlinf >= opt.stop_at_linf) {
        res.reached_linf = true;
        stopped = true;
        break;
      }
      if (v == opt.stop_at_vertex) {
        res.reached_vertex = true;
        stopped = true;
        break;
      }
      for (int j = 0; j < d; ++j) {
        const int c = box_.coordinate(v, j);
        for (int s : {-1, +1}) {
          if (s < 0 ? c <= -box_.radius() : c >= box_.radius()) continue;
          const std::int64_t w = v + s * box_.stride(j);
          if (visited_[w]) continue;
          if (opt.restrict_radius >= 0 &&
              box_.linf(w) > opt.restrict_radius) {
            continue;
          }
          const std::int64_t low = s < 0 ? w : v;
          if (!opening.edge_open(low, j)) continue;
          visited_[w] = 1;
          queue_.push_back(w);
        }
      }
    }
    if (opt.stop_at_vertex >= 0 && !res.reached_vertex) {
      if (visited_[opt.stop_at_vertex]) res.reached_vertex = true;
    }
    res.complete = !stopped;
    res.vertices = queue_;
    for (std::int64_t v : queue_) visited_[v] = 0;
    queue_.clear();
    return res;
  }

  BoxGeom box_;
  std::vector<std::uint8_t> visited_;
  std::vector<std::int64_t> queue_;
};

/// Per-thread explorer cache (the visited array is O(V) per box per thread).
ClusterExplorer& thread_local_explorer(const BoxGeom& box);

/// Calls fn(vertex_index) for every vertex with linf == radius; stops early
/// when fn returns true. Returns whether fn ever returned true.
bool any_boundary_vertex(const BoxGeom& box,
                         const std::function<bool(std::int64_t)>& fn);

}  // namespace gfflab::perc
