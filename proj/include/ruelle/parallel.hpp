#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace ruelle {

enum class Execution { Serial, Parallel };

// Thread count for parallel kernels: RUELLE_THREADS if set and positive,
// otherwise the OpenMP default.
int thread_cap();

// Runs body(i) for i in [0, count). Work items must write only to their own
// slots so that results do not depend on scheduling. If several items throw,
// the exception of the lowest index is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  if (exec == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ruelle
