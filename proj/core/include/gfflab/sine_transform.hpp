#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gfflab::fft {

enum class Kind {
  dst1,  // RODFT00: sine modes sin(pi (j+1)(k+1)/(n+1)), the Dirichlet basis
  dct2,  // REDFT10: cosine modes cos(pi (j+1/2) k / n), midpoint-grid analysis
};

/// Separable d-dimensional real-to-real FFTW transform with an owned,
/// FFTW-aligned buffer. Plans use FFTW_ESTIMATE so planning is deterministic
/// run to run (bit-identical outputs for identical inputs). Plan creation is
/// serialized internally; execute() on distinct instances is thread-safe.
class R2RTransform {
 public:
  R2RTransform(const std::vector<int>& shape, Kind kind);
  ~R2RTransform();
  R2RTransform(const R2RTransform&) = delete;
  R2RTransform& operator=(const R2RTransform&) = delete;

  std::span<double> buffer();
  std::size_t size() const { return size_; }

  /// In-place unnormalized transform of buffer(). FFTW conventions:
  /// dst1: Y[k] = 2 sum_j X[j] sin(pi(j+1)(k+1)/(n+1)) per axis;
  /// dct2: Y[k] = 2 sum_j X[j] cos(pi(j+1/2)k/n) per axis.
  void execute();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t size_;
};

}  // namespace gfflab::fft
