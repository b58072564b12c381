#include "gfflab/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace gfflab::lattice {

BoxGeom::BoxGeom(int dim, int radius) : dim_(dim), radius_(radius) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("BoxGeom: dimension out of range");
  }
  if (radius < 0) {
    throw std::invalid_argument("BoxGeom: negative radius");
  }
  side_ = 2 * radius + 1;
  vertex_count_ = 1;
  for (int j = 0; j < dim_; ++j) vertex_count_ *= side_;
  std::int64_t s = 1;
  for (int j = dim_ - 1; j >= 0; --j) {
    strides_[j] = s;
    s *= side_;
  }
}

std::int64_t BoxGeom::index(const Point& p) const {
  if (!contains(p)) {
    throw std::domain_error("BoxGeom::index: point outside box");
  }
  std::int64_t idx = 0;
  for (int j = 0; j < dim_; ++j) idx += strides_[j] * (p[j] + radius_);
  return idx;
}

Point BoxGeom::point(std::int64_t idx) const {
  Point p = Point::origin(dim_);
  for (int j = 0; j < dim_; ++j) {
    p[j] = static_cast<int>(idx / strides_[j]) % side_ - radius_;
  }
  return p;
}

int BoxGeom::coordinate(std::int64_t idx, int axis) const {
  return static_cast<int>(idx / strides_[axis]) % side_ - radius_;
}

int BoxGeom::linf(std::int64_t idx) const {
  int m = 0;
  for (int j = 0; j < dim_; ++j) {
    int c = coordinate(idx, j);
    m = std::max(m, std::abs(c));
  }
  return m;
}

std::vector<Point> BoxGeom::neighbors(const Point& p) const {
  std::vector<Point> out;
  out.reserve(2 * dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int s : {-1, +1}) {
      Point q = p;
      q[j] += s;
      if (std::abs(q[j]) <= radius_) out.push_back(q);
    }
  }
  return out;
}

void BoxGeom::neighbor_indices(std::int64_t idx,
                               std::vector<std::int64_t>& out) const {
  out.clear();
  for (int j = 0; j < dim_; ++j) {
    const int c = coordinate(idx, j);
    if (c > -radius_) out.push_back(idx - strides_[j]);
    if (c < radius_) out.push_back(idx + strides_[j]);
  }
}

std::vector<Point> BoxGeom::inner_boundary() const {
  std::vector<Point> out;
  for (std::int64_t i = 0; i < vertex_count_; ++i) {
    if (linf(i) == radius_) out.push_back(point(i));
  }
  return out;
}

std::int64_t BoxGeom::edge_id(std::int64_t low_endpoint, int axis) const {
  if (coordinate(low_endpoint, axis) >= radius_) return -1;
  return low_endpoint * dim_ + axis;
}

Annulus::Annulus(int inner, int outer) : inner(inner), outer(outer) {
  if (inner < 1 || inner >= outer) {
    throw std::invalid_argument("Annulus: need 1 <= inner < outer");
  }
}

std::vector<Point> neighbors(const Point& p, const BoxGeom& box) {
  if (!box.contains(p)) {
    throw std::domain_error("neighbors: point outside box");
  }
  return box.neighbors(p);
}

std::vector<Point> inner_boundary(const BoxGeom& box) {
  return box.inner_boundary();
}

std::vector<Point> euclidean_ball(double m, int dim) {
  if (!(m > 0)) throw std::domain_error("euclidean_ball: radius must be > 0");
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("euclidean_ball: dimension out of range");
  }
  const int r = static_cast<int>(std::floor(m));
  const double m2 = m * m;
  std::vector<Point> out;
  Point p = Point::origin(dim);
  for (int j = 0; j < dim; ++j) p[j] = -r;
  while (true) {
    if (p.norm2() <= m2) out.push_back(p);
    int j = dim - 1;
    while (j >= 0 && p[j] == r) {
      p[j] = -r;
      --j;
    }
    if (j < 0) break;
    ++p[j];
  }
  return out;
}

std::vector<Point> euclidean_sphere(double m, int dim) {
  const double m2 = m * m;
  std::vector<Point> out;
  for (const Point& p : euclidean_ball(m, dim)) {
    bool boundary = false;
    for (int j = 0; j < dim && !boundary; ++j) {
      for (int s : {-1, +1}) {
        Point q = p;
        q[j] += s;
        if (q.norm2() > m2) {
          boundary = true;
          break;
        }
      }
    }
    if (boundary) out.push_back(p);
  }
  return out;
}

}  // namespace gfflab::lattice
