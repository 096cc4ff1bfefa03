#pragma once

// Deterministic reductions over index ranges.
//
// The parallel variants split [0, n) into a fixed number of chunks that does
// not depend on the thread count, fold each chunk left to right, and then
// combine the chunk partials with a fixed pairwise tree. The result is
// therefore bit-identical for any OMP_NUM_THREADS. The serial variants are a
// plain left fold and serve as the reference implementation in tests and
// benchmarks.

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef BERGEXT_HAVE_OPENMP
#include <omp.h>
#endif

namespace bergext::kernels {

inline constexpr std::size_t kChunkCount = 64;

/// Number of threads the parallel kernels will use (1 without OpenMP).
inline int max_threads() {
#ifdef BERGEXT_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace detail {

template <class T, class Combine>
T pairwise_combine(std::vector<T>& parts, Combine&& combine) {
  std::size_t count = parts.size();
  while (count > 1) {
    const std::size_t half = (count + 1) / 2;
    for (std::size_t i = 0; i + half < count; ++i) combine(parts[i], parts[i + half]);
    count = half;
  }
  return std::move(parts.front());
}

}  // namespace detail

/// Fixed-tree reduction. `accumulate(i, acc)` adds the contribution of index i
/// into acc; `combine(a, b)` adds b into a.
template <class T, class Accumulate, class Combine>
T tree_reduce(std::size_t n, const T& zero, Accumulate&& accumulate, Combine&& combine) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(kChunkCount, n));
  const std::size_t chunk_size = n == 0 ? 0 : (n + chunks - 1) / chunks;
  std::vector<T> parts(chunks, zero);
#ifdef BERGEXT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    T& acc = parts[static_cast<std::size_t>(c)];
    for (std::size_t i = begin; i < end; ++i) accumulate(i, acc);
  }
  return detail::pairwise_combine(parts, combine);
}

template <class T, class Accumulate>
T tree_reduce(std::size_t n, const T& zero, Accumulate&& accumulate) {
  return tree_reduce(n, zero, std::forward<Accumulate>(accumulate),
                     [](T& a, const T& b) { a += b; });
}

/// Serial reference: plain left fold.
template <class T, class Accumulate>
T serial_reduce(std::size_t n, const T& zero, Accumulate&& accumulate) {
  T acc = zero;
  for (std::size_t i = 0; i < n; ++i) accumulate(i, acc);
  return acc;
}

}  // namespace bergext::kernels
