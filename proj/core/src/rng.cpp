#include "gfflab/rng.hpp"

#include <stdexcept>

namespace gfflab::rng::detail {

ZigguratTable::ZigguratTable() {
  constexpr double v = 9.91256303526217e-3;
  const double fr = std::exp(-0.5 * kR * kR);
  // v is the common layer area: v = r f(r) + tail mass, which the constants
  // must satisfy exactly
  const double tail = std::sqrt(M_PI / 2.0) * std::erfc(kR / std::sqrt(2.0));
  if (std::abs(v - (kR * fr + tail)) > 1e-12) {
    throw std::logic_error("ziggurat: area constant inconsistent");
  }
  x[0] = v / fr;
  x[1] = kR;
  f[0] = fr;  // unused (layer 0 dispatches to the tail sampler)
  f[1] = fr;
  for (int i = 2; i <= kLayers - 1; ++i) {
    const double arg = v / x[i - 1] + f[i - 1];
    x[i] = std::sqrt(-2.0 * std::log(arg));
    f[i] = arg;
    if (!(x[i] > 0) || !(x[i] < x[i - 1])) {
      throw std::logic_error("ziggurat: layer recursion failed");
    }
  }
  x[kLayers] = 0.0;
  f[kLayers] = 1.0;
  // the recursion must close at the density's top
  const double top = f[kLayers - 1] + v / x[kLayers - 1];
  if (std::abs(top - 1.0) > 1e-9) {
    throw std::logic_error("ziggurat: table does not close at the mode");
  }
}

}  // namespace gfflab::rng::detail
