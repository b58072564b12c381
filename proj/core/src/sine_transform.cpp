#include "gfflab/sine_transform.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace gfflab::fft {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct R2RTransform::Impl {
  double* data = nullptr;
  fftw_plan plan = nullptr;
};

R2RTransform::R2RTransform(const std::vector<int>& shape, Kind kind)
    : impl_(std::make_unique<Impl>()) {
  if (shape.empty()) throw std::invalid_argument("R2RTransform: empty shape");
  size_ = 1;
  for (int n : shape) {
    if (n < 1) throw std::invalid_argument("R2RTransform: bad extent");
    size_ *= static_cast<std::size_t>(n);
  }
  const fftw_r2r_kind k = (kind == Kind::dst1) ? FFTW_RODFT00 : FFTW_REDFT10;
  std::vector<fftw_r2r_kind> kinds(shape.size(), k);

  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->data = fftw_alloc_real(size_);
  if (!impl_->data) throw std::bad_alloc();
  impl_->plan =
      fftw_plan_r2r(static_cast<int>(shape.size()), shape.data(), impl_->data,
                    impl_->data, kinds.data(), FFTW_ESTIMATE);
  if (!impl_->plan) {
    fftw_free(impl_->data);
    throw std::runtime_error("R2RTransform: planning failed");
  }
}

R2RTransform::~R2RTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->plan) fftw_destroy_plan(impl_->plan);
  if (impl_->data) fftw_free(impl_->data);
}

std::span<double> R2RTransform::buffer() { return {impl_->data, size_}; }

void R2RTransform::execute() { fftw_execute(impl_->plan); }

}  // namespace gfflab::fft
