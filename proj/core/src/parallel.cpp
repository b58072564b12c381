#include "gfflab/parallel.hpp"

namespace gfflab::par {

int default_workers() {
  const unsigned h = std::thread::hardware_concurrency();
  return h ? static_cast<int>(h) : 1;
}

}  // namespace gfflab::par
