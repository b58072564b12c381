#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <stdexcept>

namespace gfflab::lattice {

inline constexpr int kMaxDim = 8;

/// Lattice point of Z^d, d <= kMaxDim. Value type with inline storage.
class Point {
 public:
  Point() = default;

  Point(std::initializer_list<int> coords) {
    if (coords.size() == 0 || coords.size() > kMaxDim) {
      throw std::invalid_argument("Point: dimension out of range");
    }
    dim_ = static_cast<int>(coords.size());
    int i = 0;
    for (int c : coords) x_[i++] = c;
  }

  static Point origin(int dim) {
    Point p;
    p.dim_ = check_dim(dim);
    p.x_.fill(0);
    return p;
  }

  /// Unit vector along `axis` scaled by `k`.
  static Point unit(int dim, int axis, int k = 1) {
    Point p = origin(dim);
    p.x_[axis] = k;
    return p;
  }

  int dim() const { return dim_; }
  int operator[](int i) const { return x_[i]; }
  int& operator[](int i) { return x_[i]; }

  long l1_norm() const {
    long s = 0;
    for (int i = 0; i < dim_; ++i) s += std::abs(x_[i]);
    return s;
  }
  long linf_norm() const {
    long s = 0;
    for (int i = 0; i < dim_; ++i) s = std::max(s, long(std::abs(x_[i])));
    return s;
  }
  double norm2() const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += double(x_[i]) * x_[i];
    return s;
  }

  Point operator+(const Point& o) const {
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.x_[i] += o.x_[i];
    return r;
  }
  Point operator-(const Point& o) const {
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.x_[i] -= o.x_[i];
    return r;
  }
  Point operator-() const {
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.x_[i] = -r.x_[i];
    return r;
  }

  bool operator==(const Point& o) const {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (x_[i] != o.x_[i]) return false;
    return true;
  }
  bool operator!=(const Point& o) const { return !(*this == o); }
  bool operator<(const Point& o) const {
    for (int i = 0; i < dim_; ++i)
      if (x_[i] != o.x_[i]) return x_[i] < o.x_[i];
    return false;
  }

 private:
  static int check_dim(int d) {
    if (d < 1 || d > kMaxDim) {
      throw std::invalid_argument("Point: dimension out of range");
    }
    return d;
  }
  int dim_ = 0;
  std::array<int, kMaxDim> x_{};
};

inline std::ostream& operator<<(std::ostream& os, const Point& p) {
  os << '(';
  for (int i = 0; i < p.dim(); ++i) os << (i ? "," : "") << p[i];
  return os << ')';
}

struct PointHash {
  std::size_t operator()(const Point& p) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL ^ p.dim();
    for (int i = 0; i < p.dim(); ++i) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p[i]));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace gfflab::lattice
