#pragma once

// Thread control and reductions whose result does not depend on the number
// of worker threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wavesem {

inline void set_num_threads(int n)
{
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, n));
#else
    (void)n;
#endif
}

inline int num_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Thread count from an environment variable, or `fallback` when unset or invalid.
inline int threads_from_env(const char* name, int fallback)
{
    const char* v = std::getenv(name);
    if (v == nullptr) {
        return fallback;
    }
    try {
        const int n = std::stoi(v);
        return n > 0 ? n : fallback;
    } catch (...) {
        return fallback;
    }
}

namespace detail {
// Fixed partition size for reductions. Partial sums are formed per block and
// combined in block order, so the rounding pattern is independent of threads.
inline constexpr std::ptrdiff_t kReduceBlock = 1024;
} // namespace detail

/// Static-schedule loop over [0, n). An exception thrown by any iteration is
/// rethrown on the calling thread after the loop.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn)
{
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(wavesem_parallel_for_error)
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

/// Deterministic sum of term(i) for i in [0, n).
template <class Term>
double deterministic_sum(std::ptrdiff_t n, Term&& term)
{
    if (n <= 0) {
        return 0.0;
    }
    const std::ptrdiff_t nblocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
        const std::ptrdiff_t lo = b * detail::kReduceBlock;
        const std::ptrdiff_t hi = std::min(n, lo + detail::kReduceBlock);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            s += term(i);
        }
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    return deterministic_sum(static_cast<std::ptrdiff_t>(a.size()),
                             [&](std::ptrdiff_t i) { return a[i] * b[i]; });
}

inline double norm2(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

inline double max_abs(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

} // namespace wavesem
