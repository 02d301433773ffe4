#include "ruelle/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ruelle {

int thread_cap() {
  const char* env = std::getenv("RUELLE_THREADS");
  if (env != nullptr) {
    try {
      const int k = std::stoi(env);
      if (k > 0) return k;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace ruelle
