#pragma once
// Thin OpenMP wrapper. Loop bodies write into preallocated slots indexed by
// the loop variable and do their own reductions serially, so results are
// identical for any thread count (and identical to the serial reference).

#ifdef _OPENMP
#include <omp.h>
#endif

namespace amp::parallel {

inline int max_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_jobs(int k) {
#ifdef _OPENMP
  if (k > 0) omp_set_num_threads(k);
#else
  (void)k;
#endif
}

template <typename Fn>
void for_index(int n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) fn(i);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

// Serial reference with the same shape; tests compare against it.
template <typename Fn>
void for_index_serial(int n, Fn&& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace amp::parallel
