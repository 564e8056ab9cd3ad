// The Legendre transform potential psi(s,x) = (u0 + s u̇0)*(x) of a geodesic
// ray, the relative potential phi = psi - psi0, kink detection through the
// maximizer set, and the finite-difference Monge-Ampere residual in (s,x).
#pragma once

#include <memory>
#include <string>

#include "hrma/convex_analysis.hpp"

namespace hrma {

struct ProblemData {
    std::shared_ptr<const DelzantPolytope> polytope;
    ScalarFieldOnP u0;      // Guillemin plus a smooth part
    ScalarFieldOnP udot0;   // smooth up to the boundary
    double quad_rel_tol = 1e-12;
    LegendreOptions legendre;
    std::string signature;  // canonical description, used as the cache key
    double t_cvx = 0;       // convex lifespan, computed at construction
};

// assembles the problem and computes the convex lifespan once
ProblemData make_problem(std::shared_ptr<const DelzantPolytope> P, ScalarFieldOnP u0,
                         ScalarFieldOnP udot0, double quad_rel_tol = 1e-12,
                         const LegendreOptions& legendre = {});

// u̇0 = -phidot0 when the initial metric velocity is handed over in moment
// coordinates (the composition with the inverse gradient map is then the
// identity in y)
ScalarFieldOnP velocity_from_kahler_data(const ProblemData& problem,
                                         const ScalarFieldOnP& phidot0_in_y);

struct PsiValue {
    double value = 0;
    MaximizerSet maximizers;
};

class GeodesicRay {
public:
    explicit GeodesicRay(const ProblemData& problem) : p_(&problem) {}
    const ProblemData& problem() const { return *p_; }

    // psi(s,x) together with the maximizer set of the conjugation
    PsiValue psi(double s, const Vec& x) const;
    double psi_value(double s, const Vec& x) const;
    double psi0(const Vec& x) const { return psi_value(0.0, x); }
    double phi(double s, const Vec& x) const { return psi_value(s, x) - psi0(x); }

    struct Singularity {
        bool singular = false;
        double diameter = 0;
    };
    // psi is differentiable at (s,x) iff the maximizer is unique; singular
    // points are those with maximizer-set diameter above tol
    Singularity singular_indicator(double s, const Vec& x, double tol) const;
    double default_singular_tol() const;

    // determinant of the (n+1)x(n+1) finite-difference Hessian of psi in
    // (s,x); central stencils, shifted one-sided in s near s = 0
    double hrma_residual(double s, const Vec& x, double h) const;
    Mat joint_hessian_fd(double s, const Vec& x, double h) const;

private:
    ScalarFieldOnP u_s(double s) const;
    const ProblemData* p_;
};

}  // namespace hrma
