#pragma once

#include <cstddef>
#include <functional>

namespace mrp {

/// Worker count: hardware concurrency, capped by the MRP_THREADS environment
/// variable when it is set to a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Callers
/// write results into slot i of a pre-sized buffer and reduce afterwards in
/// index order, so outputs never depend on scheduling. The first exception
/// thrown by any body is rethrown after all workers stop. Calls made from
/// inside a body run serially on that worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mrp
