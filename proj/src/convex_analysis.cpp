#include "hrma/convex_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hrma/numerics.hpp"
#include "hrma/parallel.hpp"

namespace hrma {

ScalarFieldOnP::ScalarFieldOnP(std::shared_ptr<const DelzantPolytope> P, ValueFn value, JetFn jet,
                               bool smooth_up_to_boundary, std::string signature)
    : P_(std::move(P)),
      value_(std::move(value)),
      jet_(std::move(jet)),
      smooth_(smooth_up_to_boundary),
      signature_(std::move(signature)) {}

ScalarFieldOnP guillemin_field(std::shared_ptr<const DelzantPolytope> P) {
    auto raw = P.get();
    return ScalarFieldOnP(
        P, [raw](const Vec& y) { return raw->guillemin_value(y); },
        [raw](const Vec& y) {
            GuilleminJet g = raw->guillemin(y);
            return FieldJet{g.value, g.gradient, g.hessian};
        },
        false, "guillemin");
}

ScalarFieldOnP polynomial_field(std::shared_ptr<const DelzantPolytope> P,
                                std::vector<Monomial> terms) {
    const int n = P->dimension();
    for (auto& t : terms) {
        if (static_cast<int>(t.exponents.size()) != n)
            throw std::invalid_argument("polynomial_field: exponent arity mismatch");
        for (int e : t.exponents)
            if (e < 0) throw std::invalid_argument("polynomial_field: negative exponent");
    }
    std::string sig = "poly{";
    for (const auto& t : terms) {
        sig += std::to_string(t.coeff) + ":";
        for (int e : t.exponents) sig += std::to_string(e) + ",";
        sig += ";";
    }
    sig += "}";

    auto pw = [](double y, int e) { return e == 0 ? 1.0 : std::pow(y, e); };
    auto value = [terms, pw](const Vec& y) {
        double s = 0;
        for (const auto& t : terms) {
            double m = t.coeff;
            for (std::size_t i = 0; i < t.exponents.size(); ++i)
                m *= pw(y[static_cast<Eigen::Index>(i)], t.exponents[i]);
            s += m;
        }
        return s;
    };
    auto jet = [terms, n, pw](const Vec& y) {
        FieldJet out;
        out.value = 0;
        out.gradient = Vec::Zero(n);
        out.hessian = Mat::Zero(n, n);
        for (const auto& t : terms) {
            double m = t.coeff;
            for (int i = 0; i < n; ++i) m *= pw(y[i], t.exponents[static_cast<std::size_t>(i)]);
            out.value += m;
            for (int i = 0; i < n; ++i) {
                int ei = t.exponents[static_cast<std::size_t>(i)];
                if (ei == 0) continue;
                double d = t.coeff * ei * pw(y[i], ei - 1);
                for (int k = 0; k < n; ++k)
                    if (k != i) d *= pw(y[k], t.exponents[static_cast<std::size_t>(k)]);
                out.gradient[i] += d;
                // second derivatives
                for (int j = i; j < n; ++j) {
                    int ej = t.exponents[static_cast<std::size_t>(j)];
                    double dd;
                    if (j == i) {
                        if (ei < 2) continue;
                        dd = t.coeff * ei * (ei - 1) * pw(y[i], ei - 2);
                        for (int k = 0; k < n; ++k)
                            if (k != i) dd *= pw(y[k], t.exponents[static_cast<std::size_t>(k)]);
                    } else {
                        if (ej == 0) continue;
                        dd = t.coeff * ei * ej * pw(y[i], ei - 1) * pw(y[j], ej - 1);
                        for (int k = 0; k < n; ++k)
                            if (k != i && k != j)
                                dd *= pw(y[k], t.exponents[static_cast<std::size_t>(k)]);
                    }
                    out.hessian(i, j) += dd;
                    if (j != i) out.hessian(j, i) += dd;
                }
            }
        }
        return out;
    };
    return ScalarFieldOnP(P, value, jet, true, sig);
}

ScalarFieldOnP constant_field(std::shared_ptr<const DelzantPolytope> P, double c) {
    const int n = P->dimension();
    return ScalarFieldOnP(
        P, [c](const Vec&) { return c; },
        [c, n](const Vec&) {
            return FieldJet{c, Vec::Zero(n), Mat::Zero(n, n)};
        },
        true, "const{" + std::to_string(c) + "}");
}

ScalarFieldOnP affine_field(std::shared_ptr<const DelzantPolytope> P, const Vec& a, double b) {
    const int n = P->dimension();
    if (static_cast<int>(a.size()) != n)
        throw std::invalid_argument("affine_field: slope arity mismatch");
    std::string sig = "affine{";
    for (Eigen::Index i = 0; i < a.size(); ++i) sig += std::to_string(a[i]) + ",";
    sig += ":" + std::to_string(b) + "}";
    return ScalarFieldOnP(
        P, [a, b](const Vec& y) { return a.dot(y) + b; },
        [a, b, n](const Vec& y) {
            return FieldJet{a.dot(y) + b, a, Mat::Zero(n, n)};
        },
        true, sig);
}

ScalarFieldOnP field_sum(const ScalarFieldOnP& f, const ScalarFieldOnP& g) {
    auto P = f.polytope_ptr();
    return ScalarFieldOnP(
        P, [f, g](const Vec& y) { return f.value(y) + g.value(y); },
        [f, g](const Vec& y) {
            FieldJet a = f.jet(y), b = g.jet(y);
            return FieldJet{a.value + b.value, a.gradient + b.gradient, a.hessian + b.hessian};
        },
        f.smooth_up_to_boundary() && g.smooth_up_to_boundary(),
        "sum(" + f.signature() + "," + g.signature() + ")");
}

ScalarFieldOnP field_scale(double c, const ScalarFieldOnP& f) {
    return ScalarFieldOnP(
        f.polytope_ptr(), [c, f](const Vec& y) { return c * f.value(y); },
        [c, f](const Vec& y) {
            FieldJet a = f.jet(y);
            return FieldJet{c * a.value, c * a.gradient, c * a.hessian};
        },
        f.smooth_up_to_boundary(), "scale(" + std::to_string(c) + "," + f.signature() + ")");
}

std::vector<Vec> interior_grid(const DelzantPolytope& P, int per_dim, double collar) {
    const int n = P.dimension();
    Vec lo = P.bounding_box_min(), hi = P.bounding_box_max();
    std::vector<Vec> pts;
    if (n == 1) {
        double w = hi[0] - lo[0];
        for (int i = 0; i < per_dim; ++i) {
            Vec y = vec1(lo[0] + w * (i + 0.5) / per_dim);
            if (P.strictly_inside(y) && P.boundary_distance(y) > collar) pts.push_back(y);
        }
    } else if (n == 2) {
        double w0 = hi[0] - lo[0], w1 = hi[1] - lo[1];
        for (int i = 0; i < per_dim; ++i)
            for (int j = 0; j < per_dim; ++j) {
                Vec y = vec2(lo[0] + w0 * (i + 0.5) / per_dim, lo[1] + w1 * (j + 0.5) / per_dim);
                if (P.strictly_inside(y) && P.boundary_distance(y) > collar) pts.push_back(y);
            }
    } else {
        throw std::runtime_error("interior_grid: dimension > 2 not supported");
    }
    return pts;
}

namespace {

struct Candidate {
    Vec y;
    double value;
};

double objective(const ScalarFieldOnP& g, const Vec& x, const Vec& y) {
    return x.dot(y) - g.value(y);
}

// local-grid shrink around y0, then damped Newton on grad g(y) = x where the
// hessian is usable; handles boundary maximizers of smooth fields and interior
// maximizers of Guillemin-singular fields alike
Candidate refine(const ScalarFieldOnP& g, const Vec& x, Vec y0, double spacing,
                 const LegendreOptions& opt) {
    const DelzantPolytope& P = g.polytope();
    const int n = P.dimension();
    double best = objective(g, x, y0);
    double w = spacing;
    const int side = 7;  // sub-grid points per dimension and round
    for (int round = 0; round < opt.shrink_rounds; ++round) {
        Vec improved = y0;
        double ibest = best;
        if (n == 1) {
            for (int i = -side; i <= side; ++i) {
                Vec y = vec1(y0[0] + w * i / side);
                if (!P.contains(y)) continue;
                double v = objective(g, x, y);
                if (v > ibest) {
                    ibest = v;
                    improved = y;
                }
            }
        } else {
            for (int i = -side; i <= side; ++i)
                for (int j = -side; j <= side; ++j) {
                    Vec y = vec2(y0[0] + w * i / side, y0[1] + w * j / side);
                    if (!P.contains(y)) continue;
                    double v = objective(g, x, y);
                    if (v > ibest) {
                        ibest = v;
                        improved = y;
                    }
                }
        }
        y0 = improved;
        best = ibest;
        w *= 0.25;
    }

    // Newton polish of grad h = x - grad g = 0 (only useful strictly inside)
    if (P.strictly_inside(y0)) {
        Vec y = y0;
        double val = best;
        for (int it = 0; it < opt.newton_iters; ++it) {
            FieldJet jet;
            try {
                jet = g.jet(y);
            } catch (const std::domain_error&) {
                break;
            }
            Vec r = x - jet.gradient;
            if (r.norm() <= 1e-13 * (1.0 + x.norm())) break;
            Eigen::LLT<Mat> llt(jet.hessian);
            Vec step;
            if (llt.info() == Eigen::Success) {
                step = llt.solve(r);
            } else {
                step = r;  // gradient ascent fallback for indefinite hessians
            }
            double lambda = 1.0;
            bool moved = false;
            for (int k = 0; k < 50; ++k) {
                Vec cand = y + lambda * step;
                if (P.strictly_inside(cand)) {
                    double v = objective(g, x, cand);
                    if (v >= val - 1e-15 * (1.0 + std::abs(val))) {
                        // accept non-decreasing moves; Newton is locally monotone
                        if (v >= val || r.norm() > 1e-10) {
                            y = cand;
                            val = std::max(val, v);
                            moved = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if (!moved) break;
        }
        if (val >= best) {
            y0 = y;
            best = val;
        }
    }
    return {y0, best};
}

}  // namespace

MaximizerSet legendre_on_polytope(const ScalarFieldOnP& g, const Vec& x,
                                  const LegendreOptions& opt) {
    const DelzantPolytope& P = g.polytope();
    const int n = P.dimension();
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("legendre_on_polytope: x dimension mismatch");

    const int K = opt.coarse_per_dim;
    Vec lo = P.bounding_box_min(), hi = P.bounding_box_max();

    // coarse scan over a cell-centered grid; kept serial (callers parallelize
    // over their own point sets)
    std::vector<Vec> pts;
    std::vector<double> vals;
    std::vector<int> gi, gj;  // lattice indices for the local-max test
    if (n == 1) {
        double w = hi[0] - lo[0];
        pts.reserve(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i) {
            Vec y = vec1(lo[0] + w * (i + 0.5) / K);
            pts.push_back(y);
            gi.push_back(i);
        }
    } else {
        double w0 = hi[0] - lo[0], w1 = hi[1] - lo[1];
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) {
                Vec y = vec2(lo[0] + w0 * (i + 0.5) / K, lo[1] + w1 * (j + 0.5) / K);
                if (!P.contains(y)) continue;
                pts.push_back(y);
                gi.push_back(i);
                gj.push_back(j);
            }
    }
    vals.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double v = objective(g, x, pts[i]);
        if (!std::isfinite(v))
            throw std::runtime_error("legendre_on_polytope: non-finite evaluator output");
        vals[i] = v;
    }
    if (pts.empty()) throw std::runtime_error("legendre_on_polytope: empty scan grid");

    // candidates: grid-local maxima (ties included); a missing neighbor counts
    // as smaller, so plateau and boundary-adjacent points qualify
    std::vector<std::size_t> cand;
    if (n == 1) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double l = i > 0 ? vals[i - 1] : -std::numeric_limits<double>::infinity();
            double r = i + 1 < pts.size() ? vals[i + 1] : -std::numeric_limits<double>::infinity();
            if (vals[i] >= l && vals[i] >= r) cand.push_back(i);
        }
    } else {
        // index map from (i,j) to the filtered array
        std::vector<std::ptrdiff_t> at(static_cast<std::size_t>(K) * K, -1);
        for (std::size_t t = 0; t < pts.size(); ++t)
            at[static_cast<std::size_t>(gi[t]) * K + gj[t]] = static_cast<std::ptrdiff_t>(t);
        auto val_at = [&](int i, int j) {
            if (i < 0 || j < 0 || i >= K || j >= K) return -std::numeric_limits<double>::infinity();
            std::ptrdiff_t t = at[static_cast<std::size_t>(i) * K + j];
            return t < 0 ? -std::numeric_limits<double>::infinity() : vals[static_cast<std::size_t>(t)];
        };
        for (std::size_t t = 0; t < pts.size(); ++t) {
            int i = gi[t], j = gj[t];
            double v = vals[t];
            if (v >= val_at(i - 1, j) && v >= val_at(i + 1, j) && v >= val_at(i, j - 1) &&
                v >= val_at(i, j + 1))
                cand.push_back(t);
        }
    }
    // keep the strongest candidates when a plateau floods the list
    std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        if (vals[a] != vals[b]) return vals[a] > vals[b];
        return a < b;
    });
    if (cand.size() > 64) cand.resize(64);

    double coarse_spacing = 0;
    for (int i = 0; i < n; ++i) coarse_spacing = std::max(coarse_spacing, (hi[i] - lo[i]) / K);

    std::vector<Candidate> refined;
    refined.reserve(cand.size());
    for (std::size_t idx : cand) refined.push_back(refine(g, x, pts[idx], coarse_spacing, opt));

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : refined) best = std::max(best, c.value);
    double tie = std::max(opt.tie_abs, opt.tie_rel * std::abs(best));

    // cluster maximizers within the merge radius, best value wins
    std::vector<Candidate> clusters;
    for (const auto& c : refined) {
        if (c.value < best - tie) continue;
        bool merged = false;
        for (auto& cl : clusters) {
            if ((cl.y - c.y).norm() <= opt.cluster_radius) {
                if (c.value > cl.value) cl = c;
                merged = true;
                break;
            }
        }
        if (!merged) clusters.push_back(c);
    }
    std::sort(clusters.begin(), clusters.end(), [](const Candidate& a, const Candidate& b) {
        for (Eigen::Index i = 0; i < a.y.size(); ++i)
            if (a.y[i] != b.y[i]) return a.y[i] < b.y[i];
        return false;
    });

    MaximizerSet out;
    out.value = best;
    for (const auto& c : clusters) out.points.push_back(c.y);
    out.diameter = 0;
    for (std::size_t a = 0; a < out.points.size(); ++a)
        for (std::size_t b = a + 1; b < out.points.size(); ++b)
            out.diameter = std::max(out.diameter, (out.points[a] - out.points[b]).norm());
    return out;
}

MaximizerSet legendre_on_polytope(const ScalarFieldOnP& g, const Vec& x, double tie_tol,
                                  const LegendreOptions& opt) {
    LegendreOptions with_tol = opt;
    with_tol.tie_abs = tie_tol;
    return legendre_on_polytope(g, x, with_tol);
}

double kahler_potential(const ScalarFieldOnP& u, const Vec& x, const LegendreOptions& opt) {
    return legendre_on_polytope(u, x, opt).value;
}

ScalarFieldOnP conjugate_field(const ScalarFieldOnP& u,
                               std::shared_ptr<const DelzantPolytope> x_box,
                               const LegendreOptions& opt) {
    auto value = [u, opt](const Vec& x) { return legendre_on_polytope(u, x, opt).value; };
    auto jet = [u, opt](const Vec& x) {
        MaximizerSet m = legendre_on_polytope(u, x, opt);
        const Vec& ystar = m.points.front();
        FieldJet uj = u.jet(ystar);
        FieldJet out;
        out.value = m.value;
        out.gradient = ystar;
        out.hessian = uj.hessian.inverse();
        return out;
    };
    return ScalarFieldOnP(std::move(x_box), value, jet, true,
                          "conjugate(" + u.signature() + ")");
}

double dual_gradient_check(const ScalarFieldOnP& u, const Vec& y, const LegendreOptions& opt) {
    FieldJet jet = u.jet(y);
    Vec xstar = jet.gradient;
    double h = 1e-6 * (1.0 + xstar.norm());
    Vec grad_psi = fd_gradient(
        [&](const Vec& x) { return kahler_potential(u, x, opt); }, xstar, h);
    return (grad_psi - y).norm();
}

double min_hessian_eigenvalue(const ScalarFieldOnP& g, const Vec& y) {
    FieldJet jet = g.jet(y);
    double scale = std::max(1.0, jet.hessian.cwiseAbs().maxCoeff());
    if ((jet.hessian - jet.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::runtime_error("min_hessian_eigenvalue: hessian is not symmetric");
    return min_symmetric_eigenvalue(0.5 * (jet.hessian + jet.hessian.transpose()));
}

double lifespan_at_point(const ScalarFieldOnP& u0, const ScalarFieldOnP& udot0, const Vec& y,
                         double psd_tol) {
    FieldJet a = u0.jet(y), b = udot0.jet(y);
    double a_min = min_symmetric_eigenvalue(a.hessian);
    if (a_min <= 0)
        throw std::invalid_argument("convex_lifespan: u0 is not strictly convex at a sample point");
    double b_scale = std::max(1.0, b.hessian.cwiseAbs().maxCoeff());
    if (min_symmetric_eigenvalue(b.hessian) >= -psd_tol * b_scale)
        return std::numeric_limits<double>::infinity();
    // s_max = 1 / lambda_max(A^{-1/2} (-B) A^{-1/2}) via Cholesky of A
    Eigen::LLT<Mat> llt(a.hessian);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("convex_lifespan: u0 hessian not positive definite");
    Mat L = llt.matrixL();
    Mat negB = -b.hessian;
    Mat M = L.triangularView<Eigen::Lower>().solve(negB);
    M = L.triangularView<Eigen::Lower>().solve(Mat(M.transpose()));
    double lam = max_symmetric_eigenvalue(0.5 * (M + M.transpose()));
    if (lam <= psd_tol) return std::numeric_limits<double>::infinity();
    return 1.0 / lam;
}

double convex_lifespan(const ScalarFieldOnP& u0, const ScalarFieldOnP& udot0,
                       const LifespanOptions& opt, Vec* binding_point) {
    const DelzantPolytope& P = u0.polytope();
    const int n = P.dimension();
    Vec lo = P.bounding_box_min(), hi = P.bounding_box_max();
    double extent = (hi - lo).maxCoeff();
    double collar = extent / (4.0 * opt.coarse_per_dim);

    std::vector<Vec> pts = interior_grid(P, opt.coarse_per_dim, collar);
    if (pts.empty()) throw std::invalid_argument("convex_lifespan: empty sample grid");

    // parallel scan, serial argmin in fixed index order; exceptions are
    // carried out of the parallel region and rethrown
    std::vector<double> smax(pts.size());
    std::vector<std::exception_ptr> errs(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        try {
            smax[i] = lifespan_at_point(u0, udot0, pts[i], opt.psd_tol);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (smax[i] < smax[arg]) arg = i;

    double T = smax[arg];
    Vec ystar = pts[arg];
    if (!std::isfinite(T)) {
        if (binding_point) *binding_point = ystar;
        return std::numeric_limits<double>::infinity();
    }

    // local refinement around the argmin to the requested relative accuracy
    double w = 2.0 * extent / opt.coarse_per_dim;
    const int side = 8;
    for (int round = 0; round < 40; ++round) {
        double prev = T;
        if (n == 1) {
            for (int i = -side; i <= side; ++i) {
                Vec y = vec1(ystar[0] + w * i / side);
                if (!P.strictly_inside(y) || P.boundary_distance(y) <= w / (4.0 * side)) continue;
                double s = lifespan_at_point(u0, udot0, y, opt.psd_tol);
                if (s < T) {
                    T = s;
                    ystar = y;
                }
            }
        } else {
            for (int i = -side; i <= side; ++i)
                for (int j = -side; j <= side; ++j) {
                    Vec y = vec2(ystar[0] + w * i / side, ystar[1] + w * j / side);
                    if (!P.strictly_inside(y) || P.boundary_distance(y) <= w / (4.0 * side))
                        continue;
                    double s = lifespan_at_point(u0, udot0, y, opt.psd_tol);
                    if (s < T) {
                        T = s;
                        ystar = y;
                    }
                }
        }
        w *= 0.25;
        if (round >= 2 && std::abs(prev - T) <= opt.rel_accuracy * 1e-2 * std::abs(T) &&
            w < 1e-7 * extent)
            break;
    }
    if (binding_point) *binding_point = ystar;
    return T;
}

}  // namespace hrma
