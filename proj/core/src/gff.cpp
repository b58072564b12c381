#include "gfflab/gff.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "gfflab/errors.hpp"
#include "gfflab/rng.hpp"

namespace gfflab::gff {

SpectralSampler::SpectralSampler(const BoxGeom& box)
    : box_(box),
      transform_(std::vector<int>(box.dim(), box.side()), fft::Kind::dst1) {
  const int L = box_.side();
  eig_cos_.resize(L);
  for (int m = 0; m < L; ++m) {
    eig_cos_[m] = std::cos(M_PI * (m + 1) / (L + 1));
  }
  norm_ = std::pow(2.0 * (L + 1), -0.5 * box_.dim());
}

void SpectralSampler::sample_into(std::uint64_t seed, std::uint64_t stream,
                                  FieldSample& out) {
  const int d = box_.dim();
  const int L = box_.side();
  const std::int64_t n = box_.vertex_count();
  auto buf = transform_.buffer();

  rng::Sequence seq(seed, stream, rng::Domain::field_normals);
  seq.fill_normals(buf.data(), static_cast<std::size_t>(n));

  // scale mode m by lambda_m^{-1/2}, lambda = 1 - (1/d) sum_j cos(...)
  std::array<int, lattice::kMaxDim> it{};
  std::int64_t flat = 0;
  const double invd = 1.0 / d;
  while (true) {
    double cs = 0;
    for (int j = 0; j + 1 < d; ++j) cs += eig_cos_[it[j]];
    const double base = 1.0 - cs * invd;
    for (int m = 0; m < L; ++m, ++flat) {
      buf[flat] /= std::sqrt(base - eig_cos_[m] * invd);
    }
    int j = d - 2;
    while (j >= 0 && ++it[j] == L) it[j--] = 0;
    if (j < 0) break;
  }

  transform_.execute();

  out.box = box_;
  out.seed = seed;
  out.stream = stream;
  out.level = 0.0;
  out.values.resize(n);
  for (std::int64_t i = 0; i < n; ++i) out.values[i] = buf[i] * norm_;
}

FieldSample SpectralSampler::sample(std::uint64_t seed, std::uint64_t stream) {
  FieldSample out;
  sample_into(seed, stream, out);
  return out;
}

Eigen::VectorXd SpectralSampler::green_column(std::int64_t v) {
  const int d = box_.dim();
  const int L = box_.side();
  const std::int64_t n = box_.vertex_count();
  auto buf = transform_.buffer();

  // (S e_v)(m), a product of per-axis sines, then 1/lambda, then S again.
  std::array<std::vector<double>, lattice::kMaxDim> sv;
  const double axis_norm = std::sqrt(2.0 / (L + 1));
  for (int j = 0; j < d; ++j) {
    const int vj = box_.coordinate(v, j) + box_.radius();
    sv[j].resize(L);
    for (int m = 0; m < L; ++m) {
      sv[j][m] = axis_norm * std::sin(M_PI * (vj + 1) * (m + 1) / (L + 1));
    }
  }
  std::array<int, lattice::kMaxDim> it{};
  std::int64_t flat = 0;
  const double invd = 1.0 / d;
  while (true) {
    double prod = 1.0, cs = 0;
    for (int j = 0; j + 1 < d; ++j) {
      prod *= sv[j][it[j]];
      cs += eig_cos_[it[j]];
    }
    const double base = 1.0 - cs * invd;
    for (int m = 0; m < L; ++m, ++flat) {
      buf[flat] = prod * sv[d - 1][m] / (base - eig_cos_[m] * invd);
    }
    int j = d - 2;
    while (j >= 0 && ++it[j] == L) it[j--] = 0;
    if (j < 0) break;
  }

  transform_.execute();

  Eigen::VectorXd g(n);
  for (std::int64_t i = 0; i < n; ++i) g[i] = buf[i] * norm_;
  return g;
}

SpectralSampler& thread_local_spectral(const BoxGeom& box) {
  thread_local std::map<std::pair<int, int>,
                        std::unique_ptr<SpectralSampler>>
      cache;
  auto key = std::make_pair(box.dim(), box.radius());
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<SpectralSampler>(box)).first;
  }
  return *it->second;
}

FieldSample sample_spectral(const BoxGeom& box, std::uint64_t seed,
                            std::uint64_t stream) {
  return thread_local_spectral(box).sample(seed, stream);
}

FieldSample sample_dense_oracle(const BoxGeom& box, std::uint64_t seed,
                                std::uint64_t stream,
                                const greens::DirichletGreen* green) {
  const std::int64_t n = box.vertex_count();
  if (n > 10000) {
    throw CapacityError("sample_dense_oracle: limited to 10000 vertices");
  }
  std::unique_ptr<greens::DirichletGreen> owned;
  if (!green) {
    owned = std::make_unique<greens::DirichletGreen>(
        box, greens::DirichletGreen::Backend::dense);
    green = owned.get();
  }
  // cache the factor per box (triangular solve is the per-sample cost)
  thread_local std::map<std::pair<int, int>, Eigen::MatrixXd> factor_cache;
  auto key = std::make_pair(box.dim(), box.radius());
  auto it = factor_cache.find(key);
  if (it == factor_cache.end()) {
    Eigen::LLT<Eigen::MatrixXd> llt(green->dense());
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("sample_dense_oracle: covariance not PD");
    }
    it = factor_cache.emplace(key, llt.matrixL()).first;
  }
  Eigen::VectorXd z(n);
  rng::Sequence seq(seed, stream, rng::Domain::dense_normals);
  seq.fill_normals(z.data(), static_cast<std::size_t>(n));
  FieldSample out;
  out.box = box;
  out.seed = seed;
  out.stream = stream;
  Eigen::VectorXd phi = it->second.triangularView<Eigen::Lower>() * z;
  out.values.assign(phi.data(), phi.data() + n);
  return out;
}

ConditionalCompleter::ConditionalCompleter(const BoxGeom& box,
                                           const std::vector<Point>& prefix)
    : box_(box) {
  for (const Point& p : prefix) {
    const std::int64_t i = box_.index(p);
    if (std::find(idx_.begin(), idx_.end(), i) == idx_.end()) {
      idx_.push_back(i);
    }
  }
  const int k = static_cast<int>(idx_.size());
  columns_.reserve(k);
  SpectralSampler& sampler = thread_local_spectral(box_);
  for (std::int64_t v : idx_) columns_.push_back(sampler.green_column(v));
  Eigen::MatrixXd gss(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) gss(a, b) = columns_[b][idx_[a]];
  }
  gss = 0.5 * (gss + gss.transpose()).eval();
  chol_.compute(gss);
  if (chol_.info() != Eigen::Success) {
    throw std::runtime_error("ConditionalCompleter: prefix covariance not PD");
  }
}

Eigen::VectorXd ConditionalCompleter::sample_prefix(std::uint64_t seed,
                                                    std::uint64_t stream) {
  const int k = static_cast<int>(idx_.size());
  Eigen::VectorXd z(k);
  rng::Sequence seq(seed, stream, rng::Domain::prefix_normals);
  seq.fill_normals(z.data(), k);
  return chol_.matrixL() * z;
}

FieldSample ConditionalCompleter::complete(
    std::uint64_t seed, std::uint64_t stream,
    const Eigen::VectorXd& prefix_values) {
  FieldSample out;
  thread_local_spectral(box_).sample_into(seed, stream, out);
  const int k = static_cast<int>(idx_.size());
  Eigen::VectorXd delta(k);
  for (int a = 0; a < k; ++a) delta[a] = prefix_values[a] - out.values[idx_[a]];
  const Eigen::VectorXd alpha = chol_.solve(delta);
  const std::int64_t n = box_.vertex_count();
  for (int a = 0; a < k; ++a) {
    const double c = alpha[a];
    if (c == 0.0) continue;
    const double* g = columns_[a].data();
    double* f = out.values.data();
    for (std::int64_t i = 0; i < n; ++i) f[i] += c * g[i];
  }
  // restriction to the prefix is exact by construction; enforce bitwise
  for (int a = 0; a < k; ++a) out.values[idx_[a]] = prefix_values[a];
  return out;
}

}  // namespace gfflab::gff
