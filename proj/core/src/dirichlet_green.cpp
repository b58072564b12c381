#include "gfflab/dirichlet_green.hpp"

#include <cmath>

#include "gfflab/errors.hpp"

namespace gfflab::greens {

void apply_killed_laplacian(const lattice::BoxGeom& box,
                            const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  const int d = box.dim();
  const std::int64_t n = box.vertex_count();
  const double w = 1.0 / (2.0 * d);
  out.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j < d; ++j) {
      const int c = box.coordinate(i, j);
      const std::int64_t s = box.stride(j);
      if (c > -box.radius()) acc += v[i - s];
      if (c < box.radius()) acc += v[i + s];
    }
    out[i] = v[i] - w * acc;
  }
}

int solve_killed_laplacian(const lattice::BoxGeom& box,
                           const Eigen::VectorXd& b, Eigen::VectorXd& x,
                           double rel_tol, int max_iter) {
  const std::int64_t n = box.vertex_count();
  x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  Eigen::VectorXd ap(n);
  double rs = r.squaredNorm();
  const double target = rel_tol * rel_tol * b.squaredNorm();
  int it = 0;
  while (rs > target && it < max_iter) {
    apply_killed_laplacian(box, p, ap);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
    ++it;
  }
  return it;
}

DirichletGreen::DirichletGreen(const lattice::BoxGeom& box, Backend backend)
    : box_(box) {
  const std::int64_t n = box_.vertex_count();
  const bool want_dense =
      backend == Backend::dense ||
      (backend == Backend::automatic && n <= kDenseLimit);
  if (backend == Backend::dense && n > kDenseLimit) {
    throw CapacityError(
        "DirichletGreen: box exceeds the dense-solve limit of " +
        std::to_string(kDenseLimit) + " vertices");
  }
  if (!want_dense) return;

  // Assemble I - P densely and invert through Cholesky.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double w = 1.0 / (2.0 * box_.dim());
  std::vector<std::int64_t> nbrs;
  for (std::int64_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    box_.neighbor_indices(i, nbrs);
    for (std::int64_t j : nbrs) a(i, j) = -w;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("DirichletGreen: Cholesky failed");
  }
  dense_ = std::make_shared<Eigen::MatrixXd>(
      llt.solve(Eigen::MatrixXd::Identity(n, n)));
}

double DirichletGreen::entry(std::int64_t x, std::int64_t y) const {
  if (dense_) return (*dense_)(x, y);
  return column(y)[x];
}

double DirichletGreen::entry(const Point& x, const Point& y) const {
  return entry(box_.index(x), box_.index(y));
}

const Eigen::VectorXd& DirichletGreen::column(std::int64_t v) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = columns_.find(v);
  if (it != columns_.end()) return it->second;
  Eigen::VectorXd g;
  if (dense_) {
    g = dense_->col(v);
  } else {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(box_.vertex_count());
    b[v] = 1.0;
    solve_killed_laplacian(box_, b, g);
  }
  return columns_.emplace(v, std::move(g)).first->second;
}

const Eigen::MatrixXd& DirichletGreen::dense() const {
  if (!dense_) {
    throw CapacityError("DirichletGreen: dense matrix not available (" +
                        std::to_string(box_.vertex_count()) + " vertices)");
  }
  return *dense_;
}

}  // namespace gfflab::greens
