// Numerical Legendre-Fenchel duality on a moment polytope: scalar fields with
// analytic jets, maximizer sets of the conjugation sup, convexity testing,
// and the convex lifespan of Cauchy data.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hrma/polytope.hpp"
#include "hrma/types.hpp"

namespace hrma {

struct FieldJet {
    double value = 0;
    Vec gradient;
    Mat hessian;
};

// A scalar function on P with value/gradient/hessian evaluation on the
// interior. The value evaluator extends continuously to the boundary
// (Guillemin-type l log l terms tend to 0 there); the jet does not.
class ScalarFieldOnP {
public:
    using ValueFn = std::function<double(const Vec&)>;
    using JetFn = std::function<FieldJet(const Vec&)>;

    ScalarFieldOnP() = default;
    ScalarFieldOnP(std::shared_ptr<const DelzantPolytope> P, ValueFn value, JetFn jet,
                   bool smooth_up_to_boundary, std::string signature);

    double value(const Vec& y) const { return value_(y); }
    FieldJet jet(const Vec& y) const { return jet_(y); }
    const DelzantPolytope& polytope() const { return *P_; }
    std::shared_ptr<const DelzantPolytope> polytope_ptr() const { return P_; }
    // false when a Guillemin log part is present
    bool smooth_up_to_boundary() const { return smooth_; }
    const std::string& signature() const { return signature_; }

private:
    std::shared_ptr<const DelzantPolytope> P_;
    ValueFn value_;
    JetFn jet_;
    bool smooth_ = true;
    std::string signature_;
};

struct Monomial {
    double coeff = 0;
    std::vector<int> exponents;  // one entry per coordinate of y
};

ScalarFieldOnP guillemin_field(std::shared_ptr<const DelzantPolytope> P);
ScalarFieldOnP polynomial_field(std::shared_ptr<const DelzantPolytope> P,
                                std::vector<Monomial> terms);
ScalarFieldOnP constant_field(std::shared_ptr<const DelzantPolytope> P, double c);
ScalarFieldOnP affine_field(std::shared_ptr<const DelzantPolytope> P, const Vec& a, double b);
ScalarFieldOnP field_sum(const ScalarFieldOnP& f, const ScalarFieldOnP& g);
ScalarFieldOnP field_scale(double c, const ScalarFieldOnP& f);

struct MaximizerSet {
    std::vector<Vec> points;  // maximizers within the tie tolerance, merged at 1e-6
    double value = 0;         // the supremum
    double diameter = 0;      // max pairwise distance of points
};

struct LegendreOptions {
    int coarse_per_dim = 2048;     // coarse scan resolution per dimension
    double cluster_radius = 1e-6;  // maximizers closer than this are merged
    double tie_abs = 1e-10;        // tie tolerance max(tie_abs, tie_rel*|value|)
    double tie_rel = 1e-8;
    int shrink_rounds = 24;        // local-grid refinement rounds
    int newton_iters = 60;
};

// sup_{y in P} [<x,y> - g(y)] together with all maximizers found within the
// tie tolerance. Coarse grid scan, then local-grid shrink plus damped-Newton
// polish from every near-maximal cluster.
MaximizerSet legendre_on_polytope(const ScalarFieldOnP& g, const Vec& x,
                                  const LegendreOptions& opt = {});

// same with an explicit absolute tie tolerance
MaximizerSet legendre_on_polytope(const ScalarFieldOnP& g, const Vec& x, double tie_tol,
                                  const LegendreOptions& opt = {});

// psi(x) = sup_{y in P} [<x,y> - u(y)]
double kahler_potential(const ScalarFieldOnP& u, const Vec& x, const LegendreOptions& opt = {});

// the conjugate of u as a field on an x-side box polytope, with the jet
// derived from the maximizer: grad psi = y*, hess psi = H_u(y*)^{-1}
ScalarFieldOnP conjugate_field(const ScalarFieldOnP& u,
                               std::shared_ptr<const DelzantPolytope> x_box,
                               const LegendreOptions& opt = {});

// |grad psi(x*) - y| with x* = grad u(y) and grad psi by central differences
double dual_gradient_check(const ScalarFieldOnP& u, const Vec& y, const LegendreOptions& opt = {});

double min_hessian_eigenvalue(const ScalarFieldOnP& g, const Vec& y);

struct LifespanOptions {
    int coarse_per_dim = 512;
    double rel_accuracy = 1e-3;
    double psd_tol = 1e-12;
};

// T = inf over interior sample points of s_max(y), where s_max is the largest
// s keeping H_{u0} + s H_{udot0} positive semidefinite; +infinity when no
// point binds. Coarse scan plus local refinement around the argmin.
double convex_lifespan(const ScalarFieldOnP& u0, const ScalarFieldOnP& udot0,
                       const LifespanOptions& opt = {}, Vec* binding_point = nullptr);

// per-point s_max(y)
double lifespan_at_point(const ScalarFieldOnP& u0, const ScalarFieldOnP& udot0, const Vec& y,
                         double psd_tol = 1e-12);

// deterministic cell-centered interior grid used by the scans (exposed for
// reports and tests); collar excludes a band of the given width at the
// boundary
std::vector<Vec> interior_grid(const DelzantPolytope& P, int per_dim, double collar = 0.0);

}  // namespace hrma
