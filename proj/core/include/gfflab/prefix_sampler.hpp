#pragma once

#include <unordered_map>
#include <vector>

#include "gfflab/gff.hpp"
#include "gfflab/metric_graph.hpp"

namespace gfflab::gff {

/// Two-stage sampler behind the Monte Carlo estimators and the rejection
/// conditioners. Stage one draws the field on small balls around the anchor
/// vertices only (their exact marginal); when an anchor's level cluster is
/// already fully determined there (all frontier edges probed closed), the
/// expensive full-box transform is skipped for that attempt. Stage two
/// completes to a full-box field whose law is exactly the zero-boundary GFF
/// consistent with stage one, so rejection estimates are unbiased.
///
/// Confinement is decidable for cluster vertices whose whole neighborhood
/// lies inside the prefix, i.e. within B(prefix_radius - 1) of an anchor.
/// The escape probability per anchor is about the one-arm probability at the
/// prefix radius. Memory: one Green column per prefix vertex.
class PrefixRejector {
 public:
  PrefixRejector(const lattice::BoxGeom& box,
                 const std::vector<Point>& anchors, int prefix_radius);

  struct Stage1 {
    Eigen::VectorXd values;  // field on the prefix vertices
    /// Per anchor: whether the anchor's cluster at the probed level is fully
    /// determined by the prefix, and if so its vertices (box indices; empty
    /// when the anchor is inactive).
    std::vector<char> confined;
    std::vector<std::vector<std::int64_t>> cluster;
    double level = 0;
  };

  Stage1 stage1(double level, std::uint64_t seed, std::uint64_t stream);

  /// Full-box completion consistent with the stage-one values.
  FieldSample complete(std::uint64_t seed, std::uint64_t stream,
                       const Stage1& s1);

  const lattice::BoxGeom& box() const { return box_; }
  int prefix_radius() const { return prefix_radius_; }
  std::size_t prefix_size() const { return completer_.prefix_indices().size(); }

 private:
  lattice::BoxGeom box_;
  int prefix_radius_;
  std::vector<std::int64_t> anchor_local_;
  ConditionalCompleter completer_;
  // local adjacency over the prefix set
  std::unordered_map<std::int64_t, int> local_;
  struct LocalVertex {
    std::int64_t box_index;
    bool interior;  // every box neighbor lies in the prefix
    // neighbor local index, edge id (for the uniform), in axis order
    std::vector<std::pair<int, std::int64_t>> nbrs;
  };
  std::vector<LocalVertex> verts_;
};

}  // namespace gfflab::gff
