// Experiment orchestration and artifact emission: convergence studies,
// lifespan reports, Monge-Ampere audits, and the spectral-level cache.
// Reruns with an identical config produce byte-identical CSVs (fixed
// summation orders, fixed seed, thread count never enters the results).
#pragma once

#include <string>
#include <vector>

#include "hrma/config.hpp"
#include "hrma/ma_measure.hpp"
#include "hrma/quantize.hpp"

namespace hrma {

struct ConvergenceResult {
    std::vector<int> ladder;
    std::vector<double> sup_errors;
    std::vector<double> eigenvalue_gaps;
    RateFit fit;
    std::vector<std::string> files;
};

// emits per-N CSVs of phi_N, tilde phi_N, E_N over the (s,x) grid plus a
// summary CSV (N, sup_error, eigenvalue_gap, fitted C, fit residual);
// optionally loads/stores spectral levels under cache_dir
ConvergenceResult run_convergence_study(const StudyConfig& config,
                                        const std::string& cache_dir = "");

struct LifespanResult {
    double t_cvx = 0;
    Vec binding_point;
    std::vector<std::string> files;
};

LifespanResult run_lifespan_report(const StudyConfig& config);

struct MAAuditRow {
    double T = 0;
    int resolution = 0;
    double total_mass = 0;
    double singular_mass = 0;
    double regular_mass = 0;
    double singular_share = 0;
    double mc_ci = 0;  // Monte Carlo fallback only
};

struct MAAuditResult {
    std::vector<MAAuditRow> rows;
    std::vector<std::string> files;
    bool monte_carlo = false;
};

MAAuditResult run_ma_audit(const StudyConfig& config);

// precomputes the ladder's spectral levels into out_dir as
// spectral_<problemhash>_N<k>.csv; existing files are kept
std::vector<std::string> run_spectral_cache(const StudyConfig& config);

// full command-line entry point (subcommands converge, lifespan, ma-audit,
// spectral-cache); returns the process exit code: 0 ok, 1 config error,
// 2 I/O error, 3 numerical failure
int cli_main(int argc, const char* const* argv);

}  // namespace hrma
