#pragma once

#include <cstdint>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bife {

// Serial is the reference path; Parallel runs the same per-row kernels under
// OpenMP. Results are bit-identical between the two because every parallel
// loop writes disjoint rows and reductions are summed in index order.
enum class Exec { Serial, Parallel };

inline int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_workers(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

/// True when called from inside an active parallel region; nested loops
/// fall back to serial execution.
inline bool in_parallel() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

inline bool run_parallel(Exec exec) { return exec == Exec::Parallel && !in_parallel(); }

/// splitmix64 finaliser; derives independent RNG seeds from (seed, stream...).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Rest>
std::uint64_t stream_seed(std::uint64_t seed, Rest... rest) {
  std::uint64_t h = mix_seed(seed);
  ((h = mix_seed(h ^ static_cast<std::uint64_t>(rest))), ...);
  return h;
}

}  // namespace bife
