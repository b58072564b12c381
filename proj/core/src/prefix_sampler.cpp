#include "gfflab/prefix_sampler.hpp"

#include <set>

namespace gfflab::gff {

namespace {
// Confinement core B(prefix_radius - 1) around each anchor plus its closed
// neighborhood: the minimal set on which the core's clusters are decidable.
std::vector<Point> build_prefix(const lattice::BoxGeom& box,
                                const std::vector<Point>& anchors,
                                int prefix_radius) {
  std::set<std::int64_t> seen;
  std::vector<Point> out;
  auto add = [&](const Point& p) {
    if (p.linf_norm() > box.radius()) return;
    const std::int64_t idx = box.index(p);
    if (seen.insert(idx).second) out.push_back(p);
  };
  const lattice::BoxGeom core(box.dim(), std::max(0, prefix_radius - 1));
  for (const Point& a : anchors) {
    for (std::int64_t k = 0; k < core.vertex_count(); ++k) {
      const Point p = a + core.point(k);
      add(p);
      for (int j = 0; j < box.dim(); ++j) {
        for (int s : {-1, +1}) {
          Point q = p;
          q[j] += s;
          add(q);
        }
      }
    }
  }
  return out;
}
}  // namespace

PrefixRejector::PrefixRejector(const lattice::BoxGeom& box,
                               const std::vector<Point>& anchors,
                               int prefix_radius)
    : box_(box),
      prefix_radius_(prefix_radius),
      completer_(box, build_prefix(box, anchors, prefix_radius)) {
  const auto& idx = completer_.prefix_indices();
  verts_.resize(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    local_[idx[k]] = static_cast<int>(k);
    verts_[k].box_index = idx[k];
  }
  std::vector<std::int64_t> nbrs;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    LocalVertex& lv = verts_[k];
    lv.interior = true;
    const std::int64_t v = lv.box_index;
    for (int j = 0; j < box_.dim(); ++j) {
      const int c = box_.coordinate(v, j);
      for (int s : {-1, +1}) {
        if (s < 0 ? c <= -box_.radius() : c >= box_.radius()) continue;
        const std::int64_t w = v + s * box_.stride(j);
        auto it = local_.find(w);
        if (it == local_.end()) {
          lv.interior = false;
          continue;
        }
        const std::int64_t low = s < 0 ? w : v;
        lv.nbrs.emplace_back(it->second, box_.edge_id(low, j));
      }
    }
  }
  for (const Point& a : anchors) {
    anchor_local_.push_back(local_.at(box_.index(a)));
  }
}

PrefixRejector::Stage1 PrefixRejector::stage1(double level, std::uint64_t seed,
                                              std::uint64_t stream) {
  Stage1 s1;
  s1.level = level;
  s1.values = completer_.sample_prefix(seed, stream);
  const int d = box_.dim();
  std::vector<char> visited(verts_.size(), 0);
  std::vector<int> queue;
  for (std::size_t a = 0; a < anchor_local_.size(); ++a) {
    std::fill(visited.begin(), visited.end(), 0);
    queue.clear();
    bool confined = true;
    std::vector<std::int64_t> cluster;
    const int start = anchor_local_[a];
    if (s1.values[start] >= level) {
      queue.push_back(start);
      visited[start] = 1;
      for (std::size_t head = 0; head < queue.size() && confined; ++head) {
        const int v = queue[head];
        if (!verts_[v].interior) {
          confined = false;
          break;
        }
        cluster.push_back(verts_[v].box_index);
        for (const auto& [w, eid] : verts_[v].nbrs) {
          if (visited[w]) continue;
          const double pa = s1.values[v];
          const double pb = s1.values[w];
          if (pb < level) continue;
          const double u = rng::uniform_at(
              seed, stream, rng::Domain::edge_uniforms,
              static_cast<std::uint64_t>(eid));
          if (u < metric::bridge_open_prob(pa, pb, level, d)) {
            visited[w] = 1;
            queue.push_back(w);
          }
        }
      }
    }
    s1.confined.push_back(confined ? 1 : 0);
    s1.cluster.push_back(confined ? std::move(cluster)
                                  : std::vector<std::int64_t>{});
  }
  return s1;
}

FieldSample PrefixRejector::complete(std::uint64_t seed, std::uint64_t stream,
                                     const Stage1& s1) {
  return completer_.complete(seed, stream, s1.values);
}

}  // namespace gfflab::gff
