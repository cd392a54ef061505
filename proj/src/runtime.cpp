#include "rte/runtime.hpp"

#include <Eigen/Core>
#include <malloc.h>

#include <algorithm>

namespace rte {

void configure_runtime(int workers) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
  Eigen::setNbThreads(std::max(workers, 1));
}

}  // namespace rte
