#pragma once

#include <exception>

namespace homobst {

/// OpenMP loop over [0, n) that carries the first exception out of the parallel region.
template <class Fn>
void parallel_for(long n, Fn &&fn) {
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(homobst_parallel_error)
            {
                if (!err) err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace homobst
