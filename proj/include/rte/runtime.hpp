#pragma once

namespace rte {

/// Keeps freed large blocks in the heap (page faults dominate otherwise) and
/// bounds Eigen's thread count. Call once at program start.
void configure_runtime(int workers = 1);

}  // namespace rte
