#pragma once

#include <cstdint>
#include <vector>

#include "gfflab/point.hpp"

namespace gfflab::lattice {

/// Geometry of the box B(N) = [-N,N]^d with a dense row-major vertex index
/// (coordinates shifted by +N, axis 0 slowest). Immutable after construction.
class BoxGeom {
 public:
  /// N = 0 is allowed as the degenerate one-vertex domain used by the
  /// Green's-function edge cases.
  BoxGeom(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int side() const { return side_; }
  std::int64_t vertex_count() const { return vertex_count_; }
  std::int64_t edge_count() const {
    return static_cast<std::int64_t>(dim_) * vertex_count_;
  }

  bool contains(const Point& p) const {
    if (p.dim() != dim_) return false;
    return p.linf_norm() <= radius_;
  }

  std::int64_t index(const Point& p) const;
  Point point(std::int64_t idx) const;

  /// L-infinity norm of the vertex with the given index.
  int linf(std::int64_t idx) const;

  /// In-box lattice neighbors in the fixed order (-e1,+e1,...,-ed,+ed).
  std::vector<Point> neighbors(const Point& p) const;

  /// Neighbor indices of vertex `idx`, appended to `out` (cleared first).
  /// Same axis order as neighbors().
  void neighbor_indices(std::int64_t idx, std::vector<std::int64_t>& out) const;

  /// Vertices with a lattice neighbor outside the box, i.e. those with some
  /// coordinate equal to +-N.
  std::vector<Point> inner_boundary() const;

  /// Canonical edges are identified by (endpoint with the smaller coordinate
  /// on `axis`, axis): id = vertex_index * d + axis. Returns -1 when the edge
  /// leaves the box.
  std::int64_t edge_id(std::int64_t low_endpoint, int axis) const;

  /// Stride of one step along `axis` in index space.
  std::int64_t stride(int axis) const { return strides_[axis]; }

  /// Coordinate of vertex `idx` along `axis`, in [-N, N].
  int coordinate(std::int64_t idx, int axis) const;

 private:
  int dim_;
  int radius_;
  int side_;
  std::int64_t vertex_count_;
  std::array<std::int64_t, kMaxDim> strides_{};
};

/// Annulus between B(inner) and B(outer); the pair (n, N) of the crossing
/// probability.
struct Annulus {
  Annulus(int inner, int outer);
  int inner;
  int outer;
};

/// All q in B(N) adjacent to p, fixed axis order. Throws std::domain_error
/// when p lies outside the box.
std::vector<Point> neighbors(const Point& p, const BoxGeom& box);

std::vector<Point> inner_boundary(const BoxGeom& box);

/// {y in Z^d : |y| <= m} (Euclidean norm). m > 0 required.
std::vector<Point> euclidean_ball(double m, int dim);

/// Discrete sphere of the Euclidean ball: members with a lattice neighbor
/// outside the ball.
std::vector<Point> euclidean_sphere(double m, int dim);

}  // namespace gfflab::lattice
