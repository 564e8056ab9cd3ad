// Thread control and deterministic parallel maps. All parallel loops in this
// project write to disjoint indices of preallocated storage; reductions are
// performed afterwards in fixed index order, so results never depend on the
// worker count.
#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hrma {

// 0 restores the hardware default
void set_threads(int k);
int max_threads();

// exceptions thrown by the body are captured and rethrown after the loop
// (they must not cross the OpenMP region boundary)
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

template <class F>
void serial_for(std::size_t n, F&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

template <class T, class F>
std::vector<T> serial_map(std::size_t n, F&& fn) {
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

}  // namespace hrma
