#pragma once

#include <cmath>
#include <stdexcept>

#include "gfflab/dirichlet_green.hpp"
#include "gfflab/free_green.hpp"

namespace gfflab::greens {

/// Two-point prediction pi^{-1} arcsin(g_xy / sqrt(g_xx g_yy)) for the
/// critical metric-graph level set. Arguments slightly outside [-1,1] from
/// solver roundoff are clamped; beyond 1e-9 it is a domain error.
inline double arcsin_two_point(double g_xy, double g_xx, double g_yy) {
  if (!(g_xx > 0) || !(g_yy > 0)) {
    throw std::domain_error("arcsin_two_point: diagonal entries must be > 0");
  }
  double rho = g_xy / std::sqrt(g_xx * g_yy);
  if (rho > 1.0 || rho < -1.0) {
    if (std::abs(rho) > 1.0 + 1e-9) {
      throw std::domain_error("arcsin_two_point: |correlation| > 1");
    }
    rho = rho > 0 ? 1.0 : -1.0;
  }
  return std::asin(rho) / M_PI;
}

}  // namespace gfflab::greens
