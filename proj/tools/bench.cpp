// Timing comparison of the OpenMP kernels against their serial reference
// implementations: spectral level build, sup-error grid scan, Alexandrov
// polar-area pass.
#include <chrono>
#include <cstdio>
#include <vector>

#include "hrma/ma_measure.hpp"
#include "hrma/parallel.hpp"
#include "hrma/quantize.hpp"
#include "hrma/studies.hpp"

using namespace hrma;

namespace {

double seconds(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx\n", name, serial,
                parallel, serial / parallel);
}

}  // namespace

int main() {
    auto P = make_polytope_preset("segment");
    ScalarFieldOnP u0 = guillemin_field(P);
    ScalarFieldOnP udot0 = polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}});  // y(1-y)
    ProblemData problem = make_problem(P, u0, udot0);
    GeodesicRay ray(problem);

    std::printf("threads available: %d\n", max_threads());

    {
        const int N = 256;
        SpectralLevel ref;
        double ts = seconds([&] { ref = build_spectral_level_serial(problem, N); });
        SpectralLevel par;
        double tp = seconds([&] { par = build_spectral_level(problem, N); });
        report("spectral level N=256", ts, tp);
        double max_diff = 0;
        for (std::size_t i = 0; i < ref.Q.size(); ++i)
            max_diff = std::max(max_diff, std::abs(ref.Q[i] - par.Q[i]));
        std::printf("  max |Q_serial - Q_parallel| = %g\n", max_diff);
    }

    {
        SpectralLevel level = build_spectral_level(problem, 64);
        std::vector<double> s_grid;
        for (int i = 0; i <= 60; ++i) s_grid.push_back(0.05 * i);
        std::vector<Vec> x_grid;
        for (int j = 0; j <= 240; ++j) x_grid.push_back(vec1(-6.0 + 0.05 * j));
        double es = 0, ep = 0;
        double ts = seconds([&] { es = sup_error_serial(ray, level, s_grid, x_grid); });
        double tp = seconds([&] { ep = sup_error(ray, level, s_grid, x_grid); });
        report("sup_error grid N=64", ts, tp);
        std::printf("  |serial - parallel| = %g\n", std::abs(es - ep));
    }

    {
        const int R = 256;
        GridBox2 grid{0.0, 3.0, -6.0, 6.0, R, R};
        std::vector<double> values(static_cast<std::size_t>(grid.node_count()));
        parallel_for(values.size(), [&](std::size_t node) {
            int i = static_cast<int>(node) / (grid.nx + 1), j = static_cast<int>(node) % (grid.nx + 1);
            values[node] = ray.psi_value(grid.s_at(i), vec1(grid.x_at(j)));
        });
        PLConvexFunction pl = pl_convexify(grid, values);
        MADecomposition ds, dp;
        double ts = seconds([&] { ds = alexandrov_measure_serial(pl); });
        double tp = seconds([&] { dp = alexandrov_measure(pl); });
        report("alexandrov 256x256", ts, tp);
        std::printf("  |total_serial - total_parallel| = %g\n",
                    std::abs(ds.total_mass - dp.total_mass));
    }
    return 0;
}
