#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "gfflab/lattice.hpp"

namespace gfflab::greens {

using lattice::Point;

/// Green's function G_D = (I - P)^{-1} of the SRW on B(N) killed upon
/// stepping outside. Symmetric positive definite; entrywise below the free
/// Green's function and increasing in the box.
///
/// Backends: a dense Cholesky factorization up to kDenseLimit vertices
/// (documented limit; ~1.2 GB at the cap), and matrix-free conjugate-gradient
/// solves against unit vectors for entries/columns on demand beyond that.
class DirichletGreen {
 public:
  static constexpr std::int64_t kDenseLimit = 12000;

  enum class Backend { automatic, dense, on_demand };

  explicit DirichletGreen(const lattice::BoxGeom& box,
                          Backend backend = Backend::automatic);

  const lattice::BoxGeom& box() const { return box_; }
  bool is_dense() const { return dense_ != nullptr; }

  /// G_D(x, y) by vertex index.
  double entry(std::int64_t x, std::int64_t y) const;
  double entry(const Point& x, const Point& y) const;

  /// Full column G_D(., v). On-demand backend solves (I-P) g = e_v by CG
  /// (relative residual 1e-12) and caches the result.
  const Eigen::VectorXd& column(std::int64_t v) const;

  /// Dense covariance matrix; throws CapacityError when over the limit.
  const Eigen::MatrixXd& dense() const;

 private:
  lattice::BoxGeom box_;
  std::shared_ptr<Eigen::MatrixXd> dense_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::int64_t, Eigen::VectorXd> columns_;
};

/// Applies (I - P_box) to v, the negative-definite-free SPD stencil of the
/// killed walk.
void apply_killed_laplacian(const lattice::BoxGeom& box,
                            const Eigen::VectorXd& v, Eigen::VectorXd& out);

/// Matrix-free CG solve of (I - P_box) x = b. Returns iterations used.
int solve_killed_laplacian(const lattice::BoxGeom& box,
                           const Eigen::VectorXd& b, Eigen::VectorXd& x,
                           double rel_tol = 1e-12, int max_iter = 200000);

}  // namespace gfflab::greens
