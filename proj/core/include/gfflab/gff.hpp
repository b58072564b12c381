#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "gfflab/dirichlet_green.hpp"
#include "gfflab/field.hpp"
#include "gfflab/sine_transform.hpp"

namespace gfflab::gff {

using lattice::BoxGeom;
using lattice::Point;

/// Exact sampler of the zero-boundary GFF through the sine eigenbasis of
/// I - P: on the box the eigenvectors are product sine modes with eigenvalue
/// 1 - (1/d) sum_j cos(pi m_j/(L+1)); iid normals are scaled by lambda^{-1/2}
/// and pushed through the orthonormal inverse sine transform. O(V log V) time
/// and O(V) memory per sample.
///
/// Holds the FFTW plan and workspace; reuse one instance per box for
/// throughput. Not safe for concurrent sample() calls on the same instance.
class SpectralSampler {
 public:
  explicit SpectralSampler(const BoxGeom& box);

  const BoxGeom& box() const { return box_; }

  FieldSample sample(std::uint64_t seed, std::uint64_t stream);
  /// Same draw without allocating: fills `out` (resized as needed).
  void sample_into(std::uint64_t seed, std::uint64_t stream, FieldSample& out);

  /// Column G_D(., v) through the same eigenbasis (one transform). Agrees
  /// with the conjugate-gradient route to solver tolerance; the two paths
  /// cross-check the transform normalization.
  Eigen::VectorXd green_column(std::int64_t v);

 private:
  BoxGeom box_;
  fft::R2RTransform transform_;
  std::vector<double> eig_cos_;  // cos(pi (m+1)/(L+1))
  double norm_;
};

/// Spec-level convenience: samples through a per-thread cached SpectralSampler
/// for the box. Same (seed, stream, box) gives bit-identical fields.
FieldSample sample_spectral(const BoxGeom& box, std::uint64_t seed,
                            std::uint64_t stream);

/// Per-thread sampler cache (one FFTW plan per box per thread).
SpectralSampler& thread_local_spectral(const BoxGeom& box);

/// Independent oracle sampler via dense Cholesky of G_D. Requires
/// vertex_count <= 10000 (CapacityError otherwise). `green` may share a
/// precomputed dense Green matrix; when null it is built internally.
FieldSample sample_dense_oracle(const BoxGeom& box, std::uint64_t seed,
                                std::uint64_t stream,
                                const greens::DirichletGreen* green = nullptr);

/// Exact conditional completion around a small "prefix" vertex set S: draw
/// the field restricted to S from its marginal N(0, G_D|_S), inspect it, and
/// only when needed complete to a full-box field whose unconditional law is
/// exactly N(0, G_D) and whose restriction to S equals the prefix draw.
/// Rejection sampling uses this to kill most attempts before paying for the
/// full-box transform. Costs |S| stored Green columns.
class ConditionalCompleter {
 public:
  ConditionalCompleter(const BoxGeom& box, const std::vector<Point>& prefix);

  const std::vector<std::int64_t>& prefix_indices() const { return idx_; }

  /// Marginal draw of the field on the prefix set (rng domain
  /// prefix_normals, so it commutes with the full-field normals).
  Eigen::VectorXd sample_prefix(std::uint64_t seed, std::uint64_t stream);

  /// Full-box completion consistent with `prefix_values`.
  FieldSample complete(std::uint64_t seed, std::uint64_t stream,
                       const Eigen::VectorXd& prefix_values);

 private:
  BoxGeom box_;
  std::vector<std::int64_t> idx_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  std::vector<Eigen::VectorXd> columns_;  // read-only after construction
};

}  // namespace gfflab::gff
