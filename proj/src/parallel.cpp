#include "hrma/parallel.hpp"

#include <thread>

namespace hrma {

namespace {
int g_requested_threads = 0;
}

void set_threads(int k) {
    g_requested_threads = k;
#ifdef _OPENMP
    if (k > 0) {
        omp_set_num_threads(k);
    } else {
        omp_set_num_threads(omp_get_num_procs());
    }
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    (void)g_requested_threads;
    return 1;
#endif
}

}  // namespace hrma
