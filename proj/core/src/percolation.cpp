#include "gfflab/percolation.hpp"

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>

namespace gfflab::perc {

std::int64_t ClusterLabeling::active_count() const {
  std::int64_t n = 0;
  for (int r : root) n += (r >= 0);
  return n;
}

ClusterLabeling label_clusters(const LevelSetGraph& graph) {
  const BoxGeom& box = graph.box;
  const int d = box.dim();
  const std::int64_t n = box.vertex_count();
  UnionFind uf(n);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const std::int64_t id = box.edge_id(i, j);
      if (id >= 0 && graph.open[id]) {
        uf.unite(static_cast<int>(i), static_cast<int>(i + box.stride(j)));
      }
    }
  }
  ClusterLabeling lab;
  lab.box = box;
  lab.level = graph.level;
  lab.root.resize(n);
  lab.size.assign(n, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!graph.active[i]) {
      lab.root[i] = -1;
      continue;
    }
    const int r = uf.find(static_cast<int>(i));
    lab.root[i] = r;
    ++lab.size[r];
  }
  return lab;
}

bool any_boundary_vertex(const BoxGeom& box,
                         const std::function<bool(std::int64_t)>& fn) {
  const int d = box.dim();
  const int N = box.radius();
  if (N == 0) return fn(0);
  const int L = box.side();
  for (int axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const std::int64_t face_base =
          side == 0 ? 0 : std::int64_t(L - 1) * box.stride(axis);
      // odometer over the remaining axes
      std::array<int, lattice::kMaxDim> it{};
      while (true) {
        std::int64_t idx = face_base;
        for (int j = 0, k = 0; j < d; ++j) {
          if (j == axis) continue;
          idx += std::int64_t(it[k++]) * box.stride(j);
        }
        if (fn(idx)) return true;
        int k = d - 2;
        while (k >= 0 && ++it[k] == L) it[k--] = 0;
        if (k < 0) break;
      }
    }
  }
  return false;
}

bool one_arm(const ClusterLabeling& labeling, const BoxGeom& box) {
  const std::int64_t origin = box.index(Point::origin(box.dim()));
  const int id = labeling.root[origin];
  if (id < 0) return false;
  return any_boundary_vertex(
      box, [&](std::int64_t v) { return labeling.root[v] == id; });
}

bool crossing(const ClusterLabeling& labeling, const Annulus& ann) {
  const BoxGeom& box = labeling.box;
  if (ann.outer > box.radius()) {
    throw std::domain_error("crossing: annulus exceeds box");
  }
  // collect cluster ids present in B(inner)
  std::vector<std::uint8_t> present(box.vertex_count(), 0);
  const BoxGeom inner(box.dim(), ann.inner);
  bool any = false;
  for (std::int64_t k = 0; k < inner.vertex_count(); ++k) {
    const std::int64_t v = box.index(inner.point(k));
    const int id = labeling.root[v];
    if (id >= 0) {
      present[id] = 1;
      any = true;
    }
  }
  if (!any) return false;
  // scan the shell at radius ann.outer
  const int d = box.dim();
  const int L = 2 * ann.outer + 1;
  const BoxGeom shell_box(d, ann.outer);
  bool hit = false;
  any_boundary_vertex(shell_box, [&](std::int64_t sv) {
    const std::int64_t v = box.index(shell_box.point(sv));
    const int id = labeling.root[v];
    if (id >= 0 && present[id]) {
      hit = true;
      return true;
    }
    return false;
  });
  (void)L;
  return hit;
}

std::int64_t volume_in(const ClusterLabeling& labeling, int cluster_id,
                       int M) {
  const BoxGeom& box = labeling.box;
  if (M > box.radius()) throw std::domain_error("volume_in: M exceeds box");
  if (cluster_id < 0) return 0;
  const BoxGeom sub(box.dim(), M);
  std::int64_t count = 0;
  for (std::int64_t k = 0; k < sub.vertex_count(); ++k) {
    if (labeling.root[box.index(sub.point(k))] == cluster_id) ++count;
  }
  return count;
}

bool two_point(const ClusterLabeling& labeling, const Point& x,
               const Point& y) {
  const int a = labeling.root[labeling.box.index(x)];
  const int b = labeling.root[labeling.box.index(y)];
  return a >= 0 && a == b;
}

ClusterExplorer& thread_local_explorer(const BoxGeom& box) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<ClusterExplorer>>
      cache;
  auto key = std::make_pair(box.dim(), box.radius());
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<ClusterExplorer>(box)).first;
  }
  return *it->second;
}

ClusterExplorer::ClusterExplorer(const BoxGeom& box)
    : box_(box), visited_(box.vertex_count(), 0) {}

}  // namespace gfflab::perc
