// Shared numerical kernels: adaptive Gauss quadrature over a polytope, stable
// log-sum-exp, finite-difference derivative stencils, symmetric eigen-solves.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>

#include "hrma/polytope.hpp"
#include "hrma/types.hpp"

namespace hrma {

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0;  // sum of embedded-pair differences over panels
    int panels_used = 0;
};

struct MultiQuadratureResult {
    Vec values;
    Vec error_estimates;
    int panels_used = 0;
};

struct QuadratureOptions {
    int max_panels = 10000;  // budget per integral; panels use a Gauss-16/8 pair
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double last_estimate, double requested_tol)
        : std::runtime_error(what), last_estimate(last_estimate), requested_tol(requested_tol) {}
    double last_estimate;
    double requested_tol;
};

// Adaptive panel quadrature of a continuous f over P (interval panels for
// n = 1, a fan triangulation with Duffy-mapped tensor panels for n = 2).
// Splits the worst panel until error <= rel_tol * |value| + 1e-300.
QuadratureResult integrate_on_polytope(const DelzantPolytope& P,
                                       const std::function<double(const Vec&)>& f, double rel_tol,
                                       const QuadratureOptions& opt = {});

// Vector-valued variant sharing nodes between components; adaptivity is
// driven by the worst component error relative to component 0 (the weight).
MultiQuadratureResult integrate_on_polytope_multi(const DelzantPolytope& P, int ncomp,
                                                  const std::function<void(const Vec&, double*)>& f,
                                                  double rel_tol, const QuadratureOptions& opt = {});

// log sum_i w_i e^{a_i}, max-shifted, compensated summation in fixed order
double log_sum_exp(std::span<const double> exponents, std::span<const double> weights);
double log_sum_exp(std::span<const double> exponents);

double neumaier_sum(std::span<const double> xs);

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);

// central second differences, symmetrized; exact for quadratics up to roundoff
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h);

double min_symmetric_eigenvalue(const Mat& H);
double max_symmetric_eigenvalue(const Mat& H);

}  // namespace hrma
