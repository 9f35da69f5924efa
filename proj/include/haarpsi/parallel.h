#ifndef HAARPSI_PARALLEL_H_
#define HAARPSI_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace haarpsi {

// Worker count from HAARPSI_JOBS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
unsigned default_jobs();

// Calls fn(i) for every i in [0, n) on up to `jobs` threads. Indices are
// handed out dynamically; the first exception thrown by fn is rethrown after
// all workers finish.
void parallel_for(std::size_t n, unsigned jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace haarpsi

#endif  // HAARPSI_PARALLEL_H_
