#include "hrma/studies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hrma/io.hpp"
#include "hrma/numerics.hpp"
#include "hrma/parallel.hpp"

namespace hrma {

namespace {

std::vector<double> make_s_grid(double t_max, double step) {
    int count = static_cast<int>(std::floor(t_max / step + 1e-9));
    std::vector<double> s(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i) s[static_cast<std::size_t>(i)] = i * step;
    return s;
}

std::vector<Vec> make_x_grid(int n, double window, double step) {
    int per_axis = static_cast<int>(std::floor(2 * window / step + 1e-9));
    std::vector<double> axis(static_cast<std::size_t>(per_axis) + 1);
    for (int j = 0; j <= per_axis; ++j) axis[static_cast<std::size_t>(j)] = -window + j * step;
    std::vector<Vec> grid;
    if (n == 1) {
        for (double x : axis) grid.push_back(vec1(x));
    } else if (n == 2) {
        for (double a : axis)
            for (double b : axis) grid.push_back(vec2(a, b));
    } else {
        throw std::runtime_error("x grid: dimension > 2 not supported");
    }
    return grid;
}

std::string format_point(const Vec& x) {
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += ';';
        s += format_full(x[i]);
    }
    return s;
}

// minimal static log-log plot of sup_error against N
void write_rate_svg(const std::string& path, const std::vector<int>& ladder,
                    const std::vector<double>& errors) {
    const double W = 480, H = 360, M = 48;
    double lx0 = std::log(static_cast<double>(ladder.front()));
    double lx1 = std::log(static_cast<double>(ladder.back()));
    double ly0 = std::log(*std::min_element(errors.begin(), errors.end()));
    double ly1 = std::log(*std::max_element(errors.begin(), errors.end()));
    if (ly1 - ly0 < 1e-12) ly1 = ly0 + 1;
    auto px = [&](double n) { return M + (std::log(n) - lx0) / (lx1 - lx0) * (W - 2 * M); };
    auto py = [&](double e) { return H - M - (std::log(e) - ly0) / (ly1 - ly0) * (H - 2 * M); };
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) +
                      "' height='" + std::to_string(H) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n<polyline fill='none' "
           "stroke='steelblue' stroke-width='2' points='";
    for (std::size_t i = 0; i < ladder.size(); ++i)
        svg += std::to_string(px(ladder[i])) + "," + std::to_string(py(errors[i])) + " ";
    svg += "'/>\n";
    for (std::size_t i = 0; i < ladder.size(); ++i)
        svg += "<circle cx='" + std::to_string(px(ladder[i])) + "' cy='" +
               std::to_string(py(errors[i])) + "' r='3' fill='crimson'/>\n";
    svg += "<text x='" + std::to_string(W / 2) + "' y='" + std::to_string(H - 12) +
           "' text-anchor='middle' font-size='12'>N (log)</text>\n";
    svg += "<text x='14' y='" + std::to_string(H / 2) +
           "' font-size='12' transform='rotate(-90 14 " + std::to_string(H / 2) +
           ")' text-anchor='middle'>sup |E_N| (log)</text>\n</svg>\n";
    write_text_file(path, svg);
}

std::string spectral_cache_path(const std::string& dir, const ProblemData& problem, int N) {
    return dir + "/spectral_" + problem_cache_key(problem) + "_N" + std::to_string(N) + ".csv";
}

}  // namespace

ConvergenceResult run_convergence_study(const StudyConfig& config, const std::string& cache_dir) {
    ProblemData problem = problem_from_config(config);
    GeodesicRay ray(problem);
    const int n = problem.polytope->dimension();
    ensure_directory(config.out_dir);

    std::vector<double> s_grid = make_s_grid(config.t_max, config.s_step);
    std::vector<Vec> x_grid = make_x_grid(n, config.x_window, config.x_step);
    const std::size_t nx = x_grid.size(), ns = s_grid.size();

    // psi0 and psi_s are level-independent; evaluate them once
    std::vector<double> psi0(nx);
    parallel_for(nx, [&](std::size_t j) { psi0[j] = ray.psi0(x_grid[j]); });
    std::vector<double> psis(ns * nx);
    parallel_for(ns * nx, [&](std::size_t idx) {
        psis[idx] = ray.psi_value(s_grid[idx / nx], x_grid[idx % nx]);
    });

    ConvergenceResult result;
    result.ladder = config.n_ladder;
    for (int N : config.n_ladder) {
        SpectralLevel level;
        std::string cache_file;
        if (!cache_dir.empty()) cache_file = spectral_cache_path(cache_dir, problem, N);
        if (!cache_file.empty() && file_exists(cache_file)) {
            level = load_spectral_level_csv(cache_file);
        } else {
            level = build_spectral_level(problem, N);
            if (!cache_file.empty()) save_spectral_level_csv(level, cache_file);
        }

        std::vector<double> vphi(ns * nx), vtilde(ns * nx), verr(ns * nx);
        parallel_for(ns * nx, [&](std::size_t idx) {
            std::size_t i = idx / nx, j = idx % nx;
            auto [lse_mu, lse_udot] = level_log_sums(problem, level, s_grid[i], x_grid[j]);
            vphi[idx] = lse_mu - psi0[j];
            vtilde[idx] = lse_udot - psi0[j];
            verr[idx] = lse_udot - psis[idx];
        });

        std::string path = config.out_dir + "/convergence_N" + std::to_string(N) + ".csv";
        CsvWriter csv(path, {"s", "x", "phi_N", "tilde_phi_N", "E_N"});
        for (std::size_t idx = 0; idx < ns * nx; ++idx)
            csv.row({format_full(s_grid[idx / nx]), format_point(x_grid[idx % nx]),
                     format_full(vphi[idx]), format_full(vtilde[idx]), format_full(verr[idx])});
        csv.close();
        result.files.push_back(path);

        double sup = 0;
        for (double e : verr) sup = std::max(sup, std::abs(e));
        result.sup_errors.push_back(sup);
        result.eigenvalue_gaps.push_back(eigenvalue_gap(problem, level));
    }

    if (result.ladder.size() >= 3) {
        result.fit = rate_fit(result.ladder, result.sup_errors);
    } else {
        result.fit = {0, 0};
    }

    std::string summary = config.out_dir + "/summary.csv";
    CsvWriter csv(summary, {"N", "sup_error", "eigenvalue_gap", "C_hat", "fit_residual"});
    for (std::size_t i = 0; i < result.ladder.size(); ++i)
        csv.row({std::to_string(result.ladder[i]), format_full(result.sup_errors[i]),
                 format_full(result.eigenvalue_gaps[i]), format_full(result.fit.C_hat),
                 format_full(result.fit.max_rel_residual)});
    csv.close();
    result.files.push_back(summary);

    if (config.plots) {
        std::string svg = config.out_dir + "/sup_error.svg";
        write_rate_svg(svg, result.ladder, result.sup_errors);
        result.files.push_back(svg);
    }
    return result;
}

LifespanResult run_lifespan_report(const StudyConfig& config) {
    ProblemData problem = problem_from_config(config);
    GeodesicRay ray(problem);
    ensure_directory(config.out_dir);

    LifespanResult result;
    Vec ystar;
    result.t_cvx = convex_lifespan(problem.u0, problem.udot0, {}, &ystar);
    result.binding_point = ystar;
    const bool finite = std::isfinite(result.t_cvx);

    std::string report = config.out_dir + "/lifespan.csv";
    {
        CsvWriter csv(report, {"key", "value"});
        csv.row({"t_cvx", finite ? format_full(result.t_cvx) : "inf"});
        csv.row({"binding_point", finite ? format_point(ystar) : "none"});
        csv.close();
    }
    result.files.push_back(report);

    // min-eigenvalue profile of H_{u_s} over the interior
    std::vector<double> s_list = finite
        ? std::vector<double>{0.0, result.t_cvx / 2, result.t_cvx, 1.5 * result.t_cvx}
        : std::vector<double>{0.0, 1.0};
    const DelzantPolytope& P = *problem.polytope;
    double extent = (P.bounding_box_max() - P.bounding_box_min()).maxCoeff();
    std::vector<Vec> ys = interior_grid(P, 512, extent / 2048.0);
    std::vector<double> mineig(ys.size() * s_list.size());
    parallel_for(mineig.size(), [&](std::size_t idx) {
        std::size_t i = idx / s_list.size(), k = idx % s_list.size();
        ScalarFieldOnP us = field_sum(problem.u0, field_scale(s_list[k], problem.udot0));
        mineig[idx] = min_hessian_eigenvalue(us, ys[i]);
    });
    std::string profile = config.out_dir + "/mineig_profile.csv";
    {
        std::vector<std::string> header{"y"};
        for (double s : s_list) header.push_back("mineig_s=" + format_full(s));
        CsvWriter csv(profile, header);
        for (std::size_t i = 0; i < ys.size(); ++i) {
            std::vector<std::string> row{format_point(ys[i])};
            for (std::size_t k = 0; k < s_list.size(); ++k)
                row.push_back(format_full(mineig[i * s_list.size() + k]));
            csv.row(row);
        }
        csv.close();
    }
    result.files.push_back(profile);

    // kink scan beyond the convex lifespan
    if (finite) {
        std::vector<double> s_scan{1.25 * result.t_cvx, 1.5 * result.t_cvx};
        std::vector<Vec> x_grid = make_x_grid(P.dimension(), config.x_window, config.x_step);
        double tol = config.sing_tol > 0 ? config.sing_tol : ray.default_singular_tol();
        std::vector<double> diam(s_scan.size() * x_grid.size());
        parallel_for(diam.size(), [&](std::size_t idx) {
            std::size_t i = idx / x_grid.size(), j = idx % x_grid.size();
            diam[idx] = ray.psi(s_scan[i], x_grid[j]).maximizers.diameter;
        });
        std::string scan = config.out_dir + "/singular_scan.csv";
        CsvWriter csv(scan, {"s", "x", "maximizer_diameter", "singular"});
        for (std::size_t idx = 0; idx < diam.size(); ++idx)
            csv.row({format_full(s_scan[idx / x_grid.size()]),
                     format_point(x_grid[idx % x_grid.size()]), format_full(diam[idx]),
                     diam[idx] > tol ? "1" : "0"});
        csv.close();
        result.files.push_back(scan);
    }
    return result;
}

MAAuditResult run_ma_audit(const StudyConfig& config) {
    ProblemData problem = problem_from_config(config);
    GeodesicRay ray(problem);
    const int n = problem.polytope->dimension();
    ensure_directory(config.out_dir);

    MAAuditResult result;
    std::string summary_path = config.out_dir + "/ma_summary.csv";
    CsvWriter summary(summary_path,
                      {"T", "resolution", "total_mass", "singular_mass", "regular_mass",
                       "singular_share", "total_decreasing", "singular_stable"});

    for (double T : config.ma_t_values) {
        std::vector<MAAuditRow> rows;
        for (int R : config.ma_resolutions) {
            MAAuditRow row;
            row.T = T;
            row.resolution = R;
            if (n == 1) {
                GridBox2 grid{0.0, T, -config.x_window, config.x_window, R, R};
                const std::size_t count = static_cast<std::size_t>(grid.node_count());
                std::vector<double> values(count), diam(count);
                parallel_for(count, [&](std::size_t node) {
                    int i = static_cast<int>(node) / (grid.nx + 1);
                    int j = static_cast<int>(node) % (grid.nx + 1);
                    PsiValue v = ray.psi(grid.s_at(i), vec1(grid.x_at(j)));
                    values[node] = v.value;
                    diam[node] = v.maximizers.diameter;
                });
                PLConvexFunction pl = pl_convexify(grid, values);
                MADecomposition dec = alexandrov_measure(pl);
                double tol =
                    config.sing_tol > 0 ? config.sing_tol : std::max(1e-4, grid.hx());
                mass_split(dec, [&](double s, double x) {
                    int i = static_cast<int>(std::lround((s - grid.s0) / grid.hs()));
                    int j = static_cast<int>(std::lround((x - grid.x0) / grid.hx()));
                    return diam[static_cast<std::size_t>(grid.node_id(i, j))] > tol;
                });
                std::ostringstream name;
                name << config.out_dir << "/ma_T" << T << "_R" << R << ".csv";
                save_ma_csv(dec, name.str());
                result.files.push_back(name.str());
                row.total_mass = dec.total_mass;
                row.singular_mass = dec.singular_mass;
                row.regular_mass = dec.regular_mass;
            } else {
                // exact path is m = 2 only; estimate the gradient-image
                // measure by seeded Monte Carlo
                result.monte_carlo = true;
                std::cerr << "ma-audit: n = " << n
                          << " has no exact Alexandrov path; falling back to Monte Carlo\n";
                int cap = std::min(R, 24);
                std::vector<double> s_axis(static_cast<std::size_t>(cap) + 1);
                for (int i = 0; i <= cap; ++i) s_axis[static_cast<std::size_t>(i)] = T * i / cap;
                std::vector<double> x_axis(static_cast<std::size_t>(cap) + 1);
                for (int j = 0; j <= cap; ++j)
                    x_axis[static_cast<std::size_t>(j)] = -config.x_window + 2 * config.x_window * j / cap;
                std::vector<Vec> nodes;
                std::vector<bool> interior;
                for (int i = 0; i <= cap; ++i)
                    for (int j = 0; j <= cap; ++j)
                        for (int k = 0; k <= cap; ++k) {
                            Vec node(3);
                            node << s_axis[static_cast<std::size_t>(i)],
                                x_axis[static_cast<std::size_t>(j)], x_axis[static_cast<std::size_t>(k)];
                            nodes.push_back(node);
                            interior.push_back(i > 0 && i < cap && j > 0 && j < cap && k > 0 &&
                                               k < cap);
                        }
                std::vector<double> values(nodes.size()), diam(nodes.size());
                parallel_for(nodes.size(), [&](std::size_t m) {
                    PsiValue v = ray.psi(nodes[m][0], nodes[m].tail(2));
                    values[m] = v.value;
                    diam[m] = v.maximizers.diameter;
                });
                // slope box from axis-aligned difference quotients
                Vec lo = Vec::Constant(3, std::numeric_limits<double>::infinity());
                Vec hi = -lo;
                const int stride_j = cap + 1, stride_i = (cap + 1) * (cap + 1);
                for (std::size_t m = 0; m < nodes.size(); ++m) {
                    auto quot = [&](std::size_t other, int axis) {
                        double d = (values[other] - values[m]) / (nodes[other][axis] - nodes[m][axis]);
                        lo[axis] = std::min(lo[axis], d);
                        hi[axis] = std::max(hi[axis], d);
                    };
                    int i = static_cast<int>(m) / stride_i;
                    int j = (static_cast<int>(m) / stride_j) % (cap + 1);
                    int k = static_cast<int>(m) % (cap + 1);
                    if (i < cap) quot(m + static_cast<std::size_t>(stride_i), 0);
                    if (j < cap) quot(m + static_cast<std::size_t>(stride_j), 1);
                    if (k < cap) quot(m + 1, 2);
                }
                double tol = config.sing_tol > 0 ? config.sing_tol
                                                 : std::max(1e-4, 2 * config.x_window / cap);
                MCMeasure mc = alexandrov_measure_mc(
                    nodes, values, interior, [&](std::size_t m) { return diam[m] > tol; }, lo, hi,
                    config.seed, config.mc_samples);
                row.total_mass = mc.total_mass;
                row.singular_mass = mc.singular_mass;
                row.regular_mass = mc.total_mass - mc.singular_mass;
                row.mc_ci = mc.ci_halfwidth;
            }
            row.singular_share = row.total_mass > 0 ? row.singular_mass / row.total_mass : 0;
            rows.push_back(row);
        }
        // refinement trend flags over the resolution ladder
        bool decreasing = true;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].total_mass >= rows[i - 1].total_mass) decreasing = false;
        double smin = rows.front().singular_mass, smax = rows.front().singular_mass;
        for (const auto& r : rows) {
            smin = std::min(smin, r.singular_mass);
            smax = std::max(smax, r.singular_mass);
        }
        bool stable = smax <= 0 ? true : (smax - smin) <= 0.1 * std::max(smax, 1e-300);
        for (const auto& r : rows) {
            summary.row({format_full(r.T), std::to_string(r.resolution), format_full(r.total_mass),
                         format_full(r.singular_mass), format_full(r.regular_mass),
                         format_full(r.singular_share), decreasing ? "1" : "0",
                         stable ? "1" : "0"});
            result.rows.push_back(r);
        }
    }
    summary.close();
    result.files.push_back(summary_path);
    return result;
}

std::vector<std::string> run_spectral_cache(const StudyConfig& config) {
    ProblemData problem = problem_from_config(config);
    ensure_directory(config.out_dir);
    std::vector<std::string> files;
    for (int N : config.n_ladder) {
        std::string path = spectral_cache_path(config.out_dir, problem, N);
        if (!file_exists(path)) {
            SpectralLevel level = build_spectral_level(problem, N);
            save_spectral_level_csv(level, path);
        }
        files.push_back(path);
    }
    return files;
}

namespace {

struct CliOverrides {
    std::string out_dir;
    std::string cache_dir;
    int threads = -1;
    std::vector<int> ladder;
    double s_step = 0, x_step = 0, x_window = 0;
    std::vector<int> resolutions;
    std::vector<double> t_values;
    bool plots = false;
};

void apply_overrides(StudyConfig& cfg, const CliOverrides& o) {
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.threads >= 0) cfg.threads = o.threads;
    if (!o.ladder.empty()) cfg.n_ladder = o.ladder;
    if (o.s_step > 0) cfg.s_step = o.s_step;
    if (o.x_step > 0) cfg.x_step = o.x_step;
    if (o.x_window > 0) cfg.x_window = o.x_window;
    if (!o.resolutions.empty()) cfg.ma_resolutions = o.resolutions;
    if (!o.t_values.empty()) cfg.ma_t_values = o.t_values;
    if (o.plots) cfg.plots = true;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"numerical laboratory for toric geodesic rays and their quantization"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides over;
    app.add_option("--config", config_path, "study configuration file")->required();
    app.add_option("--out", over.out_dir, "output directory override");
    app.add_option("--threads", over.threads, "worker count (affects speed, never results)");
    app.add_option("--ladder", over.ladder, "N ladder override")->delimiter(',');
    app.add_option("--s-step", over.s_step, "s grid step override");
    app.add_option("--x-step", over.x_step, "x grid step override");
    app.add_option("--x-window", over.x_window, "x window override");
    app.add_option("--resolutions", over.resolutions, "MA grid resolutions override")
        ->delimiter(',');
    app.add_option("--t-values", over.t_values, "MA audit T values override")->delimiter(',');
    app.add_flag("--plots", over.plots, "emit static plot files");
    std::string cache_dir;
    app.add_option("--cache", cache_dir, "spectral level cache directory");

    auto* converge = app.add_subcommand("converge", "convergence study of the quantum potentials");
    auto* lifespan = app.add_subcommand("lifespan", "convex lifespan report");
    auto* ma_audit = app.add_subcommand("ma-audit", "Alexandrov measure audit");
    auto* spectral = app.add_subcommand("spectral-cache", "precompute spectral level CSVs");
    for (auto* sub : {converge, lifespan, ma_audit, spectral}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    StudyConfig cfg;
    try {
        cfg = parse_config(config_path);
        apply_overrides(cfg, over);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    set_threads(cfg.threads);

    auto diagnostics = [&](const std::exception& e) {
        try {
            ensure_directory(cfg.out_dir);
            write_text_file(cfg.out_dir + "/diagnostics.txt",
                            std::string("numerical failure\n") + e.what() + "\n");
        } catch (...) {
            // diagnostics are best effort
        }
    };

    try {
        if (converge->parsed()) {
            ConvergenceResult r = run_convergence_study(cfg, cache_dir);
            for (std::size_t i = 0; i < r.ladder.size(); ++i)
                std::cout << "N=" << r.ladder[i] << " sup_error=" << format_full(r.sup_errors[i])
                          << " gap=" << format_full(r.eigenvalue_gaps[i]) << "\n";
            std::cout << "rate fit: C=" << format_full(r.fit.C_hat)
                      << " residual=" << format_full(r.fit.max_rel_residual) << "\n";
        } else if (lifespan->parsed()) {
            LifespanResult r = run_lifespan_report(cfg);
            std::cout << "t_cvx=" << (std::isfinite(r.t_cvx) ? format_full(r.t_cvx) : "inf")
                      << " binding_point="
                      << (std::isfinite(r.t_cvx) ? format_point(r.binding_point) : "none")
                      << "\n";
        } else if (ma_audit->parsed()) {
            MAAuditResult r = run_ma_audit(cfg);
            for (const auto& row : r.rows)
                std::cout << "T=" << row.T << " R=" << row.resolution
                          << " total=" << format_full(row.total_mass)
                          << " singular=" << format_full(row.singular_mass)
                          << " share=" << format_full(row.singular_share) << "\n";
        } else if (spectral->parsed()) {
            for (const auto& f : run_spectral_cache(cfg)) std::cout << f << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        diagnostics(e);
        return 3;
    }
    return 0;
}

}  // namespace hrma
