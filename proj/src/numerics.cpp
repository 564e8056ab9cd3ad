#include "hrma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <Eigen/Eigenvalues>

namespace hrma {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], orders 8 and 16
const double GL8_X[4] = {0.18343464249564980, 0.52553240991632899, 0.79666647741362674,
                         0.96028985649753623};
const double GL8_W[4] = {0.36268378337836198, 0.31370664587788729, 0.22238103445337447,
                         0.10122853629037626};
const double GL16_X[8] = {0.095012509837637440, 0.28160355077925891, 0.45801677765722739,
                          0.61787624440264375,  0.75540440835500303, 0.86563120238783174,
                          0.94457502307323258,  0.98940093499164993};
const double GL16_W[8] = {0.18945061045506850, 0.18260341504492359, 0.16915651939500254,
                          0.14959598881657673, 0.12462897125553387, 0.095158511682492785,
                          0.062253523938647893, 0.027152459411754095};

void gauss_nodes_1d(int order, std::vector<double>& x, std::vector<double>& w) {
    x.clear();
    w.clear();
    const double* gx = order == 8 ? GL8_X : GL16_X;
    const double* gw = order == 8 ? GL8_W : GL16_W;
    int half = order / 2;
    for (int i = half - 1; i >= 0; --i) {
        x.push_back(-gx[i]);
        w.push_back(gw[i]);
    }
    for (int i = 0; i < half; ++i) {
        x.push_back(gx[i]);
        w.push_back(gw[i]);
    }
}

struct Panel {
    // n = 1: [a0, b0]; n = 2: triangle (p0, p1, p2)
    Vec p0, p1, p2;
    Vec hi_vals;   // per-component integral, order-16 rule
    Vec lo_vals;   // order-8 rule on the same panel
    double err = 0;
    long id = 0;   // creation index, deterministic tie-break
};

class PanelIntegrator {
public:
    PanelIntegrator(const DelzantPolytope& P, int ncomp,
                    const std::function<void(const Vec&, double*)>& f)
        : P_(P), ncomp_(ncomp), f_(f) {
        gauss_nodes_1d(16, x16_, w16_);
        gauss_nodes_1d(8, x8_, w8_);
    }

    void evaluate(Panel& p) {
        p.hi_vals = rule(p, x16_, w16_);
        p.lo_vals = rule(p, x8_, w8_);
        p.err = (p.hi_vals - p.lo_vals).cwiseAbs().maxCoeff();
    }

    std::vector<Panel> split(const Panel& p) {
        std::vector<Panel> out;
        if (P_.dimension() == 1) {
            Vec mid = 0.5 * (p.p0 + p.p1);
            out.push_back({p.p0, mid, Vec(), Vec(), Vec(), 0, 0});
            out.push_back({mid, p.p1, Vec(), Vec(), Vec(), 0, 0});
        } else {
            Vec m01 = 0.5 * (p.p0 + p.p1), m12 = 0.5 * (p.p1 + p.p2), m20 = 0.5 * (p.p2 + p.p0);
            out.push_back({p.p0, m01, m20, Vec(), Vec(), 0, 0});
            out.push_back({m01, p.p1, m12, Vec(), Vec(), 0, 0});
            out.push_back({m20, m12, p.p2, Vec(), Vec(), 0, 0});
            out.push_back({m01, m12, m20, Vec(), Vec(), 0, 0});
        }
        return out;
    }

private:
    Vec rule(const Panel& p, const std::vector<double>& gx, const std::vector<double>& gw) {
        Vec acc = Vec::Zero(ncomp_);
        std::vector<double> buf(static_cast<std::size_t>(ncomp_));
        if (P_.dimension() == 1) {
            double a = p.p0[0], b = p.p1[0];
            double c = 0.5 * (b - a), m = 0.5 * (a + b);
            Vec y(1);
            for (std::size_t i = 0; i < gx.size(); ++i) {
                y[0] = m + c * gx[i];
                f_(y, buf.data());
                for (int k = 0; k < ncomp_; ++k) acc[k] += c * gw[i] * buf[k];
            }
        } else {
            // Duffy map of the tensor rule onto the triangle: (u,v) in [0,1]^2
            // -> p0 + u(1-v)(p1-p0) + uv(p2-p0), Jacobian 2A*u
            double area2 = (p.p1[0] - p.p0[0]) * (p.p2[1] - p.p0[1]) -
                           (p.p1[1] - p.p0[1]) * (p.p2[0] - p.p0[0]);
            Vec y(2);
            for (std::size_t i = 0; i < gx.size(); ++i) {
                double u = 0.5 * (1.0 + gx[i]);
                for (std::size_t j = 0; j < gx.size(); ++j) {
                    double v = 0.5 * (1.0 + gx[j]);
                    double l1 = u * (1.0 - v), l2 = u * v;
                    y[0] = p.p0[0] + l1 * (p.p1[0] - p.p0[0]) + l2 * (p.p2[0] - p.p0[0]);
                    y[1] = p.p0[1] + l1 * (p.p1[1] - p.p0[1]) + l2 * (p.p2[1] - p.p0[1]);
                    double jac = std::abs(area2) * u * 0.25;  // 0.25 from the two [-1,1]->[0,1] maps
                    f_(y, buf.data());
                    for (int k = 0; k < ncomp_; ++k) acc[k] += jac * gw[i] * gw[j] * buf[k];
                }
            }
        }
        return acc;
    }

    const DelzantPolytope& P_;
    int ncomp_;
    const std::function<void(const Vec&, double*)>& f_;
    std::vector<double> x16_, w16_, x8_, w8_;
};

}  // namespace

MultiQuadratureResult integrate_on_polytope_multi(const DelzantPolytope& P, int ncomp,
                                                  const std::function<void(const Vec&, double*)>& f,
                                                  double rel_tol, const QuadratureOptions& opt) {
    const int n = P.dimension();
    if (n > 2) throw std::invalid_argument("integrate_on_polytope: dimension > 2 not supported");
    if (ncomp < 1) throw std::invalid_argument("integrate_on_polytope: ncomp must be >= 1");

    PanelIntegrator integ(P, ncomp, f);
    std::vector<Panel> panels;
    if (n == 1) {
        panels.push_back({P.vertices()[0], P.vertices()[1], Vec(), Vec(), Vec(), 0, 0});
    } else {
        // fan triangulation around the vertex centroid; vertices need a
        // counterclockwise cyclic order first
        Vec c = P.interior_point();
        std::vector<Vec> vs = P.vertices();
        std::sort(vs.begin(), vs.end(), [&](const Vec& a, const Vec& b) {
            return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
        });
        for (std::size_t i = 0; i < vs.size(); ++i)
            panels.push_back({c, vs[i], vs[(i + 1) % vs.size()], Vec(), Vec(), 0, 0});
    }

    long next_id = 0;
    for (auto& p : panels) {
        p.id = next_id++;
        integ.evaluate(p);
    }

    auto total = [&]() {
        Vec vals = Vec::Zero(ncomp), errs = Vec::Zero(ncomp);
        for (const auto& p : panels) {
            vals += p.hi_vals;
            errs += (p.hi_vals - p.lo_vals).cwiseAbs();
        }
        return std::make_pair(vals, errs);
    };

    while (true) {
        auto [vals, errs] = total();
        double scale = std::max(std::abs(vals[0]), 1e-300);
        double worst_rel = errs.maxCoeff() / scale;
        if (worst_rel <= rel_tol || errs.maxCoeff() <= 1e-300) {
            MultiQuadratureResult r;
            r.values = vals;
            r.error_estimates = errs;
            r.panels_used = static_cast<int>(panels.size());
            return r;
        }
        if (static_cast<int>(panels.size()) >= opt.max_panels) {
            throw QuadratureError("integrate_on_polytope: panel budget exhausted", worst_rel,
                                  rel_tol);
        }
        // split the panel with the largest error (lowest id breaks ties)
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i) {
            if (panels[i].err > panels[worst].err ||
                (panels[i].err == panels[worst].err && panels[i].id < panels[worst].id))
                worst = i;
        }
        Panel dying = panels[worst];
        panels.erase(panels.begin() + static_cast<std::ptrdiff_t>(worst));
        for (auto& child : integ.split(dying)) {
            child.id = next_id++;
            integ.evaluate(child);
            panels.push_back(child);
        }
    }
}

QuadratureResult integrate_on_polytope(const DelzantPolytope& P,
                                       const std::function<double(const Vec&)>& f, double rel_tol,
                                       const QuadratureOptions& opt) {
    auto multi = integrate_on_polytope_multi(
        P, 1, [&](const Vec& y, double* out) { out[0] = f(y); }, rel_tol, opt);
    return {multi.values[0], multi.error_estimates[0], multi.panels_used};
}

double neumaier_sum(std::span<const double> xs) {
    double s = 0, c = 0;
    for (double x : xs) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

double log_sum_exp(std::span<const double> exponents, std::span<const double> weights) {
    if (exponents.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    if (!weights.empty() && weights.size() != exponents.size())
        throw std::invalid_argument("log_sum_exp: size mismatch");
    double m = exponents[0];
    for (double a : exponents) m = std::max(m, a);
    double s = 0, c = 0;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        double x = std::exp(exponents[i] - m);
        if (!weights.empty()) x *= weights[i];
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return m + std::log(s + c);
}

double log_sum_exp(std::span<const double> exponents) {
    return log_sum_exp(exponents, std::span<const double>());
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2 * h);
    }
    return g;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    const Eigen::Index m = x.size();
    Mat H(m, m);
    double f0 = f(x);
    for (Eigen::Index i = 0; i < m; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        H(i, i) = (f(xp) - 2 * f0 + f(xm)) / (h * h);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            Vec a = x, b = x, c = x, d = x;
            a[i] += h; a[j] += h;
            b[i] += h; b[j] -= h;
            c[i] -= h; c[j] += h;
            d[i] -= h; d[j] -= h;
            double v = (f(a) - f(b) - f(c) + f(d)) / (4 * h * h);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return 0.5 * (H + H.transpose());
}

double min_symmetric_eigenvalue(const Mat& H) {
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_symmetric_eigenvalue(const Mat& H) {
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace hrma
