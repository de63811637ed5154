#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smikm {

// Every parallel kernel in this library also runs in Serial mode; the two
// paths must produce bitwise-identical results (loop bodies are elementwise
// and never touch shared mutable state).
enum class ExecMode { Serial, Parallel };

template <typename F>
void parallel_for(std::int64_t n, ExecMode mode, F&& body) {
#ifdef _OPENMP
  if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)mode;
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace smikm
