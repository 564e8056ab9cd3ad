// Toric Toeplitz quantization: norming constants and eigenvalues by
// moment-map pushforward quadrature over P, the level-N quantum potentials
// phi_N and tilde phi_N, the error field E_N, and convergence-rate fits.
//
// All alpha-integrals share quadrature nodes between the weight and the
// eigenvalue numerator so that their ratio cancels node error; exponents are
// handled in log space throughout. Normalization: Q is the plain pushforward
// integral with dy (no volume or 2*pi torus factors); constant rescalings
// only shift phi_N by O(log N / N) and vanish in the limit.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "hrma/geodesic.hpp"

namespace hrma {

struct SpectralLevel {
    int N = 0;
    LatticeSet lattice;
    std::vector<double> Q;      // norming constants, aligned with lattice.points
    std::vector<double> log_Q;
    std::vector<double> mu;     // Toeplitz eigenvalues
    std::vector<double> q_err;  // relative quadrature error estimates
};

// Q(alpha) = int_P exp(N (u0(y) + <alpha/N - y, grad u0(y)>)) dy
double norming_constant(const ProblemData& problem, int N, const LVec& alpha);

// mu_{N,alpha} = (1/Q) int_P -u̇0(y) exp(N (u0(y) + <alpha/N - y, grad u0>)) dy
double toeplitz_eigenvalue(const ProblemData& problem, int N, const LVec& alpha);

SpectralLevel build_spectral_level(const ProblemData& problem, int N);         // parallel map
SpectralLevel build_spectral_level_serial(const ProblemData& problem, int N);  // reference

// the two diagonal sums before the potential subtraction:
//   first  = (1/N) log sum_a e^{s N mu_a} e^{<x,a>} / Q(a)
//   second = (1/N) log sum_a e^{-s N u̇0(a/N)} e^{<x,a>} / Q(a)
// phi_N = first - psi0, tilde phi_N = second - psi0, E_N = second - psi_s
std::pair<double, double> level_log_sums(const ProblemData& problem, const SpectralLevel& level,
                                         double s, const Vec& x);

// phi_N(s,x) = (1/N) log sum_a e^{s N mu_a} e^{<x,a> - N psi0(x)} / Q(a)
double phi_N(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x);

// same sum with e^{-s N u̇0(a/N)} in place of e^{s N mu_a}
double tilde_phi_N(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x);

// E_N(s,x) = tilde phi_N(s,x) - phi_s(x)
double error_field(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x);

// phi_N - phi_s (differs from E_N by the quantization comparison term)
double phi_N_minus_phi(const GeodesicRay& ray, const SpectralLevel& level, double s, const Vec& x);

// max |E_N| over the grid; parallel fill, serial reduction in index order
double sup_error(const GeodesicRay& ray, const SpectralLevel& level,
                 std::span<const double> s_grid, std::span<const Vec> x_grid);
double sup_error_serial(const GeodesicRay& ray, const SpectralLevel& level,
                        std::span<const double> s_grid, std::span<const Vec> x_grid);

struct RateFit {
    double C_hat = 0;
    double max_rel_residual = 0;
};

// one-parameter least squares of e_N ~ C log N / N
RateFit rate_fit(std::span<const int> levels, std::span<const double> errors);

// max_alpha |mu_{N,alpha} + u̇0(alpha/N)|
double eigenvalue_gap(const ProblemData& problem, const SpectralLevel& level);

// Finite-level surrogate of the running sup: max over computed N >= l. The
// limit definition applies an upper semi-continuous regularization; on
// continuous grid data that regularization is the identity, so the surrogate
// returns the raw running sup.
double quantum_potential_estimate(const GeodesicRay& ray,
                                  std::span<const SpectralLevel> levels, int l, double s,
                                  const Vec& x);

// CSV persistence (columns N, alpha semicolon-joined, Q, mu, q_err)
void save_spectral_level_csv(const SpectralLevel& level, const std::string& path);
SpectralLevel load_spectral_level_csv(const std::string& path);

// content hash of the problem description, keys the spectral cache
std::string problem_cache_key(const ProblemData& problem);

}  // namespace hrma
