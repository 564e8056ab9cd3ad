#include "hrma/geodesic.hpp"

#include <cmath>

namespace hrma {

ProblemData make_problem(std::shared_ptr<const DelzantPolytope> P, ScalarFieldOnP u0,
                         ScalarFieldOnP udot0, double quad_rel_tol,
                         const LegendreOptions& legendre) {
    ProblemData prob;
    prob.polytope = std::move(P);
    prob.u0 = std::move(u0);
    prob.udot0 = std::move(udot0);
    prob.quad_rel_tol = quad_rel_tol;
    prob.legendre = legendre;
    prob.signature = prob.polytope->describe() + "|u0=" + prob.u0.signature() +
                     "|udot0=" + prob.udot0.signature();
    prob.t_cvx = convex_lifespan(prob.u0, prob.udot0);
    return prob;
}

ScalarFieldOnP velocity_from_kahler_data(const ProblemData& problem,
                                         const ScalarFieldOnP& phidot0_in_y) {
    (void)problem;
    return field_scale(-1.0, phidot0_in_y);
}

ScalarFieldOnP GeodesicRay::u_s(double s) const {
    if (s == 0.0) return p_->u0;
    return field_sum(p_->u0, field_scale(s, p_->udot0));
}

PsiValue GeodesicRay::psi(double s, const Vec& x) const {
    if (s < 0) throw std::invalid_argument("psi: s must be nonnegative");
    MaximizerSet m = legendre_on_polytope(u_s(s), x, p_->legendre);
    return {m.value, std::move(m)};
}

double GeodesicRay::psi_value(double s, const Vec& x) const { return psi(s, x).value; }

GeodesicRay::Singularity GeodesicRay::singular_indicator(double s, const Vec& x,
                                                         double tol) const {
    PsiValue v = psi(s, x);
    return {v.maximizers.diameter > tol, v.maximizers.diameter};
}

double GeodesicRay::default_singular_tol() const {
    // 10x the spacing of the final refinement stage, floored at 10x the
    // maximizer merge radius
    const LegendreOptions& o = p_->legendre;
    double extent = (p_->polytope->bounding_box_max() - p_->polytope->bounding_box_min()).maxCoeff();
    double refined = (extent / o.coarse_per_dim) * std::pow(0.25, o.shrink_rounds);
    return std::max(10.0 * refined, 10.0 * o.cluster_radius);
}

Mat GeodesicRay::joint_hessian_fd(double s, const Vec& x, double h) const {
    const int n = p_->polytope->dimension();
    const int m = n + 1;
    // shift to a one-sided stencil in s when the central one would cross 0
    // (accuracy drops to O(h) there)
    bool onesided = s - h < 0;
    auto f = [&](double ss, const Vec& xx) { return psi_value(ss, xx); };

    Mat H(m, m);
    double f0 = f(s, x);
    if (onesided) {
        H(0, 0) = (f(s, x) - 2 * f(s + h, x) + f(s + 2 * h, x)) / (h * h);
    } else {
        H(0, 0) = (f(s + h, x) - 2 * f0 + f(s - h, x)) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        H(i + 1, i + 1) = (f(s, xp) - 2 * f0 + f(s, xm)) / (h * h);
        // mixed s/x entries
        double v;
        if (onesided) {
            double gp = (f(s + h, xp) - f(s + h, xm)) / (2 * h);
            double g0 = (f(s, xp) - f(s, xm)) / (2 * h);
            v = (gp - g0) / h;
        } else {
            v = (f(s + h, xp) - f(s + h, xm) - f(s - h, xp) + f(s - h, xm)) / (4 * h * h);
        }
        H(0, i + 1) = v;
        H(i + 1, 0) = v;
        for (int j = i + 1; j < n; ++j) {
            Vec a = x, b = x, c = x, d = x;
            a[i] += h; a[j] += h;
            b[i] += h; b[j] -= h;
            c[i] -= h; c[j] += h;
            d[i] -= h; d[j] -= h;
            double w = (f(s, a) - f(s, b) - f(s, c) + f(s, d)) / (4 * h * h);
            H(i + 1, j + 1) = w;
            H(j + 1, i + 1) = w;
        }
    }
    return H;
}

double GeodesicRay::hrma_residual(double s, const Vec& x, double h) const {
    if (s <= 0) throw std::invalid_argument("hrma_residual: s must be positive");
    return joint_hessian_fd(s, x, h).determinant();
}

}  // namespace hrma
