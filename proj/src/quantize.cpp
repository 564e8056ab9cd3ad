#include "hrma/quantize.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hrma/io.hpp"
#include "hrma/numerics.hpp"
#include "hrma/parallel.hpp"

namespace hrma {

namespace {

Vec lattice_to_point(const LVec& alpha, int N) {
    Vec w(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        w[i] = static_cast<double>(alpha[i]) / static_cast<double>(N);
    return w;
}

struct AlphaIntegrals {
    double Q;
    double log_Q;
    double mu;
    double q_err;
};

// Both integrals in one adaptive pass. The exponent
//   L(y) = N (u0(y) + <w - y, grad u0(y)>),  w = alpha/N,
// attains its maximum N u0(w) at y = w (convexity of u0), which is the
// log-space shift; the shifted integrand extends continuously to the boundary.
AlphaIntegrals alpha_integrals(const ProblemData& problem, int N, const LVec& alpha) {
    const DelzantPolytope& P = *problem.polytope;
    Vec w = lattice_to_point(alpha, N);
    if (!P.contains(w))
        throw std::invalid_argument("norming_constant: alpha/N is not in the polytope");
    const double shift = static_cast<double>(N) * problem.u0.value(w);

    auto f = [&](const Vec& y, double* out) {
        FieldJet jet = problem.u0.jet(y);
        double L = static_cast<double>(N) * (jet.value + (w - y).dot(jet.gradient));
        double g = std::exp(L - shift);
        out[0] = g;
        out[1] = -problem.udot0.value(y) * g;
    };
    MultiQuadratureResult r = integrate_on_polytope_multi(P, 2, f, problem.quad_rel_tol);
    double v0 = r.values[0];
    if (!(v0 > 0) || !std::isfinite(v0))
        throw QuadratureError("norming_constant: degenerate weight integral",
                              r.error_estimates[0], problem.quad_rel_tol);
    AlphaIntegrals out;
    out.Q = std::exp(shift + std::log(v0));
    if (!(out.Q > 0) || !std::isfinite(out.Q))
        throw QuadratureError("norming_constant: Q under/overflows double precision",
                              r.error_estimates[0], problem.quad_rel_tol);
    // log_Q is derived from the stored double Q so that a level rebuilt from
    // its CSV reproduces identical sums
    out.log_Q = std::log(out.Q);
    out.mu = r.values[1] / v0;
    out.q_err = r.error_estimates.maxCoeff() / v0;
    return out;
}

}  // namespace

double norming_constant(const ProblemData& problem, int N, const LVec& alpha) {
    return alpha_integrals(problem, N, alpha).Q;
}

double toeplitz_eigenvalue(const ProblemData& problem, int N, const LVec& alpha) {
    return alpha_integrals(problem, N, alpha).mu;
}

SpectralLevel build_spectral_level_serial(const ProblemData& problem, int N) {
    SpectralLevel level;
    level.N = N;
    level.lattice = lattice_points(*problem.polytope, N);
    const std::size_t m = level.lattice.points.size();
    level.Q.resize(m);
    level.log_Q.resize(m);
    level.mu.resize(m);
    level.q_err.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        AlphaIntegrals a = alpha_integrals(problem, N, level.lattice.points[i]);
        level.Q[i] = a.Q;
        level.log_Q[i] = a.log_Q;
        level.mu[i] = a.mu;
        level.q_err[i] = a.q_err;
    }
    return level;
}

SpectralLevel build_spectral_level(const ProblemData& problem, int N) {
    SpectralLevel level;
    level.N = N;
    level.lattice = lattice_points(*problem.polytope, N);
    const std::size_t m = level.lattice.points.size();
    level.Q.resize(m);
    level.log_Q.resize(m);
    level.mu.resize(m);
    level.q_err.resize(m);

    // per-alpha integrals are independent; exceptions are carried out of the
    // parallel region and rethrown in index order
    std::vector<std::exception_ptr> errs(m);
    parallel_for(m, [&](std::size_t i) {
        try {
            AlphaIntegrals a = alpha_integrals(problem, N, level.lattice.points[i]);
            level.Q[i] = a.Q;
            level.log_Q[i] = a.log_Q;
            level.mu[i] = a.mu;
            level.q_err[i] = a.q_err;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return level;
}

namespace {

double x_dot_alpha(const Vec& x, const LVec& alpha) {
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * static_cast<double>(alpha[i]);
    return s;
}

// (1/N) log sum_a exp(extra(a) + <x,a> - log Q(a)); lexicographic order with
// compensated summation inside log_sum_exp
template <class Extra>
double level_log_sum(const SpectralLevel& level, const Vec& x, Extra&& extra) {
    if (level.lattice.points.empty()) throw std::invalid_argument("phi_N: empty lattice");
    std::vector<double> exponents(level.lattice.points.size());
    for (std::size_t i = 0; i < exponents.size(); ++i)
        exponents[i] =
            extra(i) + x_dot_alpha(x, level.lattice.points[i]) - level.log_Q[i];
    return log_sum_exp(exponents) / static_cast<double>(level.N);
}

}  // namespace

std::pair<double, double> level_log_sums(const ProblemData& problem, const SpectralLevel& level,
                                         double s, const Vec& x) {
    double first = level_log_sum(level, x, [&](std::size_t i) {
        return s * static_cast<double>(level.N) * level.mu[i];
    });
    double second = level_log_sum(level, x, [&](std::size_t i) {
        Vec w = lattice_to_point(level.lattice.points[i], level.N);
        return -s * static_cast<double>(level.N) * problem.udot0.value(w);
    });
    return {first, second};
}

double phi_N(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x) {
    double lse = level_log_sum(level, x, [&](std::size_t i) {
        return s * static_cast<double>(level.N) * level.mu[i];
    });
    return lse - ray.psi0(x);
}

double tilde_phi_N(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x) {
    const ProblemData& p = ray.problem();
    double lse = level_log_sum(level, x, [&](std::size_t i) {
        Vec w = lattice_to_point(level.lattice.points[i], level.N);
        return -s * static_cast<double>(level.N) * p.udot0.value(w);
    });
    return lse - ray.psi0(x);
}

double error_field(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x) {
    const ProblemData& p = ray.problem();
    double lse = level_log_sum(level, x, [&](std::size_t i) {
        Vec w = lattice_to_point(level.lattice.points[i], level.N);
        return -s * static_cast<double>(level.N) * p.udot0.value(w);
    });
    return lse - ray.psi_value(s, x);
}

double phi_N_minus_phi(const GeodesicRay& ray, const SpectralLevel& level, double s,
                       const Vec& x) {
    double lse = level_log_sum(level, x, [&](std::size_t i) {
        return s * static_cast<double>(level.N) * level.mu[i];
    });
    return lse - ray.psi_value(s, x);
}

namespace {

template <bool Parallel>
double sup_error_impl(const GeodesicRay& ray, const SpectralLevel& level,
                      std::span<const double> s_grid, std::span<const Vec> x_grid) {
    if (s_grid.empty() || x_grid.empty())
        throw std::invalid_argument("sup_error: empty grid");
    const std::size_t total = s_grid.size() * x_grid.size();
    std::vector<double> vals(total);
    auto body = [&](std::size_t idx) {
        std::size_t i = idx / x_grid.size(), j = idx % x_grid.size();
        vals[idx] = std::abs(error_field(ray, level, s_grid[i], x_grid[j]));
    };
    if constexpr (Parallel)
        parallel_for(total, body);
    else
        serial_for(total, body);
    double m = 0;
    for (double v : vals) m = std::max(m, v);
    return m;
}

}  // namespace

double sup_error(const GeodesicRay& ray, const SpectralLevel& level,
                 std::span<const double> s_grid, std::span<const Vec> x_grid) {
    return sup_error_impl<true>(ray, level, s_grid, x_grid);
}

double sup_error_serial(const GeodesicRay& ray, const SpectralLevel& level,
                        std::span<const double> s_grid, std::span<const Vec> x_grid) {
    return sup_error_impl<false>(ray, level, s_grid, x_grid);
}

RateFit rate_fit(std::span<const int> levels, std::span<const double> errors) {
    if (levels.size() != errors.size() || levels.size() < 3)
        throw std::invalid_argument("rate_fit: need at least 3 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw std::invalid_argument("rate_fit: levels must be increasing");
    double num = 0, den = 0;
    std::vector<double> e(errors.begin(), errors.end());
    for (auto& v : e) v = std::max(v, DBL_EPSILON);
    for (std::size_t i = 0; i < e.size(); ++i) {
        double m = std::log(static_cast<double>(levels[i])) / levels[i];
        num += e[i] * m;
        den += m * m;
    }
    RateFit fit;
    fit.C_hat = num / den;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double m = std::log(static_cast<double>(levels[i])) / levels[i];
        fit.max_rel_residual =
            std::max(fit.max_rel_residual, std::abs(e[i] - fit.C_hat * m) / e[i]);
    }
    return fit;
}

double eigenvalue_gap(const ProblemData& problem, const SpectralLevel& level) {
    double gap = 0;
    for (std::size_t i = 0; i < level.mu.size(); ++i) {
        Vec w = lattice_to_point(level.lattice.points[i], level.N);
        gap = std::max(gap, std::abs(level.mu[i] + problem.udot0.value(w)));
    }
    return gap;
}

double quantum_potential_estimate(const GeodesicRay& ray,
                                  std::span<const SpectralLevel> levels, int l, double s,
                                  const Vec& x) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& level : levels) {
        if (level.N < l) continue;
        best = std::max(best, phi_N(ray, level, s, x));
        any = true;
    }
    if (!any)
        throw std::invalid_argument("quantum_potential_estimate: no computed level with N >= l");
    return best;
}

void save_spectral_level_csv(const SpectralLevel& level, const std::string& path) {
    CsvWriter csv(path, {"N", "alpha", "Q", "mu", "q_err"});
    for (std::size_t i = 0; i < level.Q.size(); ++i) {
        std::string alpha;
        for (Eigen::Index k = 0; k < level.lattice.points[i].size(); ++k) {
            if (k) alpha += ';';
            alpha += std::to_string(level.lattice.points[i][k]);
        }
        csv.row({std::to_string(level.N), alpha, format_full(level.Q[i]),
                 format_full(level.mu[i]), format_full(level.q_err[i])});
    }
    csv.close();
}

SpectralLevel load_spectral_level_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spectral CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty spectral CSV: " + path);
    SpectralLevel level;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw IoError("malformed spectral CSV row: " + line);
        int N = std::stoi(cells[0]);
        if (level.N == 0) {
            level.N = N;
            level.lattice.level = N;
        } else if (level.N != N) {
            throw IoError("spectral CSV mixes levels: " + path);
        }
        std::stringstream as(cells[1]);
        std::vector<std::int64_t> comps;
        while (std::getline(as, cell, ';')) comps.push_back(std::stoll(cell));
        LVec alpha(static_cast<Eigen::Index>(comps.size()));
        for (std::size_t k = 0; k < comps.size(); ++k)
            alpha[static_cast<Eigen::Index>(k)] = comps[k];
        level.lattice.points.push_back(alpha);
        double Q = std::stod(cells[2]);
        level.Q.push_back(Q);
        level.log_Q.push_back(std::log(Q));
        level.mu.push_back(std::stod(cells[3]));
        level.q_err.push_back(std::stod(cells[4]));
    }
    if (level.N == 0) throw IoError("spectral CSV has no rows: " + path);
    return level;
}

std::string problem_cache_key(const ProblemData& problem) {
    return fnv1a64_hex(problem.signature + "|qtol=" + format_full(problem.quad_rel_tol));
}

}  // namespace hrma
