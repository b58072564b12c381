#include "gfflab/free_green.hpp"

#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "gfflab/rng.hpp"
#include "gfflab/sine_transform.hpp"

namespace gfflab::greens {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// int_0^{1/sqrt(2)} v^n exp(-c v^2) dv, closed form by recursion. Drives the
// exact integral of the Gaussian-damped pole compensator.
double truncated_gaussian_moment(int n, double c) {
  const double a = 1.0 / std::sqrt(2.0);
  if (c < 1e-6) {
    // series in c; remainder < c^3/6 < 2e-19
    const double an1 = std::pow(a, n + 1);
    return an1 / (n + 1) - c * an1 * a * a / (n + 3) +
           0.5 * c * c * an1 * a * a * a * a / (n + 5);
  }
  const double ea = std::exp(-c * a * a);
  const double sc = std::sqrt(c);
  if (n == 0) {
    return 0.5 * std::sqrt(M_PI) / sc * std::erf(sc * a);
  }
  if (n == 1) {
    return (1.0 - ea) / (2.0 * c);
  }
  return ((n - 1) * truncated_gaussian_moment(n - 2, c) -
          std::pow(a, n - 1) * ea) /
         (2.0 * c);
}

// int_{R^d} 2d e^{-2|k|^2} cos(k.x) / |k|^2 dk. The cube-tail remainder of
// restricting to [-pi,pi]^d is below 1e-8 (integrand < e^{-2 pi^2} outside)
// and is absorbed by the grid-doubling tolerance.
double compensator_integral(int d, double x_norm2) {
  return 2.0 * d * std::pow(M_PI, 0.5 * d) * 2.0 *
         truncated_gaussian_moment(d - 3, 0.25 * x_norm2);
}

struct RawTable {
  int range;
  std::vector<double> values;  // (range+1)^d, axis 0 slowest
};

RawTable fourier_raw(int dim, int range, int grid) {
  if (2 * range > grid - 1) {
    throw std::invalid_argument("free_green: grid too small for range");
  }
  const int M = grid;
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(M);

  // per-axis midpoint tables
  std::vector<double> ck(M), k2(M), ge(M);
  for (int i = 0; i < M; ++i) {
    const double k = -M_PI + (i + 0.5) * (kTwoPi / M);
    ck[i] = std::cos(k);
    k2[i] = k * k;
    ge[i] = std::exp(-2.0 * k * k);
  }

  fft::R2RTransform dct(std::vector<int>(dim, M), fft::Kind::dct2);
  auto buf = dct.buffer();

  // f(k) = 1/W(k) - 2d e^{-2|k|^2}/|k|^2, W = 1 - (1/d) sum_j cos k_j
  std::array<int, lattice::kMaxDim> it{};
  std::size_t flat = 0;
  while (true) {
    double cs = 0, ks = 0, ep = 1;
    for (int j = 0; j + 1 < dim; ++j) {
      cs += ck[it[j]];
      ks += k2[it[j]];
      ep *= ge[it[j]];
    }
    for (int i = 0; i < M; ++i, ++flat) {
      const double w = 1.0 - (cs + ck[i]) / dim;
      buf[flat] = 1.0 / w - 2.0 * dim * (ep * ge[i]) / (ks + k2[i]);
    }
    int j = dim - 2;
    while (j >= 0 && ++it[j] == M) it[j--] = 0;
    if (j < 0) break;
  }

  dct.execute();

  RawTable out;
  out.range = range;
  const std::size_t side = range + 1;
  std::size_t n_out = 1;
  for (int j = 0; j < dim; ++j) n_out *= side;
  out.values.resize(n_out);

  const double grid_scale = std::pow(double(M), -dim) * std::pow(0.5, dim);
  const double inv_2pi_d = std::pow(kTwoPi, -dim);

  std::array<int, lattice::kMaxDim> x{};
  for (std::size_t o = 0; o < n_out; ++o) {
    std::size_t rem = o;
    std::size_t src = 0;
    int xsum = 0;
    double xn2 = 0;
    for (int j = 0; j < dim; ++j) {
      std::size_t stride = 1;
      for (int jj = j + 1; jj < dim; ++jj) stride *= side;
      x[j] = static_cast<int>(rem / stride);
      rem %= stride;
      xsum += x[j];
      xn2 += double(x[j]) * x[j];
      std::size_t src_stride = 1;
      for (int jj = j + 1; jj < dim; ++jj) src_stride *= M;
      src += static_cast<std::size_t>(2 * x[j]) * src_stride;
    }
    const double sign = (xsum % 2 == 0) ? 1.0 : -1.0;
    out.values[o] = sign * grid_scale * buf[src] +
                    inv_2pi_d * compensator_integral(dim, xn2);
  }
  return out;
}

// Scaled-Bessel integrand prod_j e^{-t/d} I_{x_j}(t/d) with analytic tail
// beyond T (local CLT with first correction).
double bessel_point(int dim, const int* absdx) {
  double sum_sq = 0;
  double corr_sum = 0;  // sum_j (4 x_j^2 - 1)
  for (int j = 0; j < dim; ++j) {
    sum_sq += double(absdx[j]) * absdx[j];
    corr_sum += 4.0 * absdx[j] * absdx[j] - 1.0;
  }
  const double T =
      std::max(2000.0 * dim, 20.0 * dim * (4.0 * sum_sq + dim));

  auto f = [&](double t) {
    double p = 1.0;
    const double z = t / dim;
    for (int j = 0; j < dim; ++j) {
      p *= gsl_sf_bessel_In_scaled(absdx[j], z);
    }
    return p;
  };
  double err = 0;
  const double head =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, 0.0, T, 12, 1e-11, &err);

  const double pref = std::pow(dim / kTwoPi, 0.5 * dim);
  const double hd = 0.5 * dim;
  const double tail = pref * (std::pow(T, 1.0 - hd) / (hd - 1.0) -
                              (dim / 8.0) * corr_sum * std::pow(T, -hd) / hd);
  return head + tail;
}

}  // namespace

bool FreeGreenTable::covers(const Point& x) const {
  if (x.dim() != dim_) return false;
  return x.linf_norm() <= range_;
}

std::int64_t FreeGreenTable::index_abs(const int* absdx) const {
  std::int64_t idx = 0;
  for (int j = 0; j < dim_; ++j) idx = idx * (range_ + 1) + absdx[j];
  return idx;
}

double FreeGreenTable::at_abs(const int* absdx) const {
  return values_[index_abs(absdx)];
}

double FreeGreenTable::at(const Point& x) const {
  if (!covers(x)) {
    throw std::domain_error("FreeGreenTable: displacement out of range");
  }
  int a[lattice::kMaxDim];
  for (int j = 0; j < dim_; ++j) a[j] = std::abs(x[j]);
  return at_abs(a);
}

FreeGreenTable FreeGreenTable::build_fourier(int dim, int range, int grid,
                                             double tol) {
  if (dim < 3) throw std::domain_error("free_green: requires d >= 3");
  RawTable fine = fourier_raw(dim, range, grid);
  // doubling stability: compare against the half grid on the common range
  const int coarse_grid = grid / 2;
  const int check_range = std::min(range, (coarse_grid - 1) / 2);
  RawTable coarse = fourier_raw(dim, check_range, coarse_grid);
  const std::size_t side_f = range + 1;
  const std::size_t side_c = check_range + 1;
  double maxdiff = 0;
  std::size_t n_c = 1;
  for (int j = 0; j < dim; ++j) n_c *= side_c;
  for (std::size_t o = 0; o < n_c; ++o) {
    std::size_t rem = o, fo = 0;
    for (int j = 0; j < dim; ++j) {
      std::size_t stride_c = 1, stride_f = 1;
      for (int jj = j + 1; jj < dim; ++jj) {
        stride_c *= side_c;
        stride_f *= side_f;
      }
      fo += (rem / stride_c) * stride_f;
      rem %= stride_c;
    }
    maxdiff = std::max(maxdiff, std::abs(fine.values[fo] - coarse.values[o]));
  }
  if (!(maxdiff < tol)) {
    std::ostringstream os;
    os << "free_green: grid " << grid << " not converged (doubling moves "
       << maxdiff << " >= " << tol << ")";
    throw std::runtime_error(os.str());
  }
  FreeGreenTable t;
  t.dim_ = dim;
  t.range_ = range;
  t.grid_ = grid;
  t.values_ = std::move(fine.values);
  return t;
}

FreeGreenTable FreeGreenTable::build_bessel(int dim, int range) {
  if (dim < 3) throw std::domain_error("free_green: requires d >= 3");
  FreeGreenTable t;
  t.dim_ = dim;
  t.range_ = range;
  t.grid_ = 0;
  const std::size_t side = range + 1;
  std::size_t n = 1;
  for (int j = 0; j < dim; ++j) n *= side;
  t.values_.resize(n);
  int a[lattice::kMaxDim];
  for (std::size_t o = 0; o < n; ++o) {
    std::size_t rem = o;
    for (int j = 0; j < dim; ++j) {
      std::size_t stride = 1;
      for (int jj = j + 1; jj < dim; ++jj) stride *= side;
      a[j] = static_cast<int>(rem / stride);
      rem %= stride;
    }
    t.values_[o] = bessel_point(dim, a);
  }
  return t;
}

void FreeGreenTable::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("FreeGreenTable: cannot open " + path);
  os << "# free_green dim=" << dim_ << " range=" << range_ << " grid=" << grid_
     << "\n";
  os.precision(17);
  const std::size_t side = range_ + 1;
  int a[lattice::kMaxDim];
  for (std::size_t o = 0; o < values_.size(); ++o) {
    std::size_t rem = o;
    for (int j = 0; j < dim_; ++j) {
      std::size_t stride = 1;
      for (int jj = j + 1; jj < dim_; ++jj) stride *= side;
      a[j] = static_cast<int>(rem / stride);
      rem %= stride;
    }
    for (int j = 0; j < dim_; ++j) os << a[j] << ',';
    os << values_[o] << '\n';
  }
}

FreeGreenTable FreeGreenTable::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("FreeGreenTable: cannot open " + path);
  std::string header;
  std::getline(is, header);
  FreeGreenTable t;
  if (std::sscanf(header.c_str(), "# free_green dim=%d range=%d grid=%d",
                  &t.dim_, &t.range_, &t.grid_) != 3) {
    throw std::runtime_error("FreeGreenTable: bad header in " + path);
  }
  const std::size_t side = t.range_ + 1;
  std::size_t n = 1;
  for (int j = 0; j < t.dim_; ++j) n *= side;
  t.values_.resize(n);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::int64_t idx = 0;
    for (int j = 0; j < t.dim_; ++j) {
      int c;
      ls >> c;
      idx = idx * side + c;
    }
    ls >> t.values_[idx];
    ++seen;
  }
  if (seen != n) throw std::runtime_error("FreeGreenTable: truncated " + path);
  return t;
}

const FreeGreenTable& default_table(int d) {
  if (d < 3) throw std::domain_error("free_green: requires d >= 3");
  static std::mutex mu;
  static std::map<int, FreeGreenTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) {
    FreeGreenTable t;
    switch (d) {
      case 3:
        t = FreeGreenTable::build_fourier(3, 127, 256);
        break;
      case 4:
        t = FreeGreenTable::build_fourier(4, 15, 96);
        break;
      case 5:
        // the memory-feasible Fourier grids alias above 1e-6 in d = 5; the
        // Bessel route is exact to ~1e-9 there
        t = FreeGreenTable::build_bessel(5, 5);
        break;
      default:
        t = FreeGreenTable::build_bessel(d, 3);
        break;
    }
    it = cache.emplace(d, std::move(t)).first;
  }
  return it->second;
}

double free_green(int d, const Point& x) {
  if (d < 3) throw std::domain_error("free_green: requires d >= 3");
  const FreeGreenTable& t = default_table(d);
  if (t.covers(x)) return t.at(x);
  return free_green_bessel(d, x);
}

double free_green_bessel(int d, const Point& x) {
  if (d < 3) throw std::domain_error("free_green: requires d >= 3");
  int a[lattice::kMaxDim];
  for (int j = 0; j < d; ++j) a[j] = std::abs(x[j]);
  return bessel_point(d, a);
}

double green_zero(int d) { return free_green(d, Point::origin(d)); }

std::vector<VisitCountEstimate> visit_count_oracle(
    int d, const std::vector<Point>& targets, std::uint64_t walks, int steps,
    std::uint64_t seed) {
  const std::size_t nt = targets.size();
  std::vector<VisitCountEstimate> out(nt);
  std::vector<double> mean(nt, 0), m2(nt, 0);
  std::vector<std::array<int, lattice::kMaxDim>> tg(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    for (int j = 0; j < d; ++j) tg[i][j] = targets[i][j];
  }
  std::array<int, lattice::kMaxDim> pos{};
  std::vector<double> visits(nt);
  for (std::uint64_t w = 0; w < walks; ++w) {
    rng::Sequence rs(seed, w, rng::Domain::walk_steps);
    pos.fill(0);
    std::fill(visits.begin(), visits.end(), 0.0);
    for (int k = 0; k <= steps; ++k) {
      for (std::size_t i = 0; i < nt; ++i) {
        bool eq = true;
        for (int j = 0; j < d; ++j) {
          if (pos[j] != tg[i][j]) {
            eq = false;
            break;
          }
        }
        if (eq) visits[i] += 1.0;
      }
      const int s = static_cast<int>(rs.next_u64() % (2ull * d));
      pos[s >> 1] += (s & 1) ? 1 : -1;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const double delta = visits[i] - mean[i];
      mean[i] += delta / double(w + 1);
      m2[i] += delta * (visits[i] - mean[i]);
    }
  }
  const double pref = std::pow(d / kTwoPi, 0.5 * d);
  const double hd = 0.5 * d;
  for (std::size_t i = 0; i < nt; ++i) {
    const double xn2 = targets[i].norm2();
    const double T = steps;
    // sum_{k>T} p_k(0,x) by the local CLT, first correction included; the
    // remainder bound is folded into the reported sem.
    const double tail =
        pref * (std::pow(T, 1.0 - hd) / (hd - 1.0) -
                (d * xn2 / 2.0) * std::pow(T, -hd) / hd);
    const double tail_unc =
        pref * std::pow(T, 1.0 - hd) / (hd - 1.0) *
        (d * (xn2 + 2.0) / (2.0 * T) + 2.0 / T) * 2.0;
    VisitCountEstimate& e = out[i];
    e.walks = walks;
    e.steps = steps;
    e.tail_correction = tail;
    e.tail_uncertainty = tail_unc;
    const double var = walks > 1 ? m2[i] / double(walks - 1) : 0.0;
    const double sem_mc = std::sqrt(var / double(walks));
    e.mean = mean[i] + tail;
    e.sem = std::sqrt(sem_mc * sem_mc + tail_unc * tail_unc);
  }
  return out;
}

}  // namespace gfflab::greens
