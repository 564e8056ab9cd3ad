#include "hrma/ma_measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "hrma/io.hpp"
#include "hrma/numerics.hpp"
#include "hrma/parallel.hpp"

namespace hrma {

PLConvexFunction::PLConvexFunction(GridBox2 grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (grid_.ns < 1 || grid_.nx < 1)
        throw std::invalid_argument("PLConvexFunction: need at least one cell per axis");
    if (static_cast<int>(values_.size()) != grid_.node_count())
        throw std::invalid_argument("PLConvexFunction: value count does not match the grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("PLConvexFunction: non-finite value");
}

bool PLConvexFunction::satisfies_edge_convexity(double tol) const {
    auto mid_ok = [&](double a, double m, double b) { return m <= 0.5 * (a + b) + tol; };
    for (int i = 0; i <= grid_.ns; ++i)
        for (int j = 0; j + 2 <= grid_.nx; ++j)
            if (!mid_ok(value_at(i, j), value_at(i, j + 1), value_at(i, j + 2))) return false;
    for (int j = 0; j <= grid_.nx; ++j)
        for (int i = 0; i + 2 <= grid_.ns; ++i)
            if (!mid_ok(value_at(i, j), value_at(i + 1, j), value_at(i + 2, j))) return false;
    for (int i = 0; i + 2 <= grid_.ns; ++i)
        for (int j = 0; j + 2 <= grid_.nx; ++j) {
            if (!mid_ok(value_at(i, j), value_at(i + 1, j + 1), value_at(i + 2, j + 2)))
                return false;
            if (!mid_ok(value_at(i, j + 2), value_at(i + 1, j + 1), value_at(i + 2, j)))
                return false;
        }
    return true;
}

namespace {

// exact 1d lower convex hull of an evenly spaced sequence; returns the hull
// values at every index
void lower_hull_1d(std::vector<double>& z) {
    const std::size_t K = z.size();
    if (K < 3) return;
    std::vector<std::size_t> hull;
    for (std::size_t k = 0; k < K; ++k) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            // b above segment (a,k): (z_b - z_a)(k - a) >= (z_k - z_a)(b - a)
            if ((z[b] - z[a]) * static_cast<double>(k - a) >=
                (z[k] - z[a]) * static_cast<double>(b - a))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    std::vector<double> out(K);
    for (std::size_t seg = 0; seg + 1 < hull.size(); ++seg) {
        std::size_t a = hull[seg], b = hull[seg + 1];
        out[a] = z[a];
        out[b] = z[b];
        for (std::size_t k = a + 1; k < b; ++k) {
            double t = static_cast<double>(k - a) / static_cast<double>(b - a);
            out[k] = z[a] + t * (z[b] - z[a]);
        }
    }
    z = out;
}

}  // namespace

PLConvexFunction pl_convexify(const GridBox2& grid, std::vector<double> samples) {
    PLConvexFunction probe(grid, samples);  // validates shape and finiteness
    const int ns = grid.ns, nx = grid.nx;
    auto at = [&](int i, int j) -> double& {
        return samples[static_cast<std::size_t>(grid.node_id(i, j))];
    };

    std::vector<double> line;
    for (int sweep = 0; sweep < 50; ++sweep) {
        bool changed = false;
        auto run_line = [&](auto&& index, int len) {
            line.resize(static_cast<std::size_t>(len));
            for (int k = 0; k < len; ++k) line[static_cast<std::size_t>(k)] = index(k);
            std::vector<double> before = line;
            lower_hull_1d(line);
            for (int k = 0; k < len; ++k) {
                if (line[static_cast<std::size_t>(k)] < before[static_cast<std::size_t>(k)]) {
                    changed = true;
                }
            }
            return line;
        };
        // rows (x direction)
        for (int i = 0; i <= ns; ++i) {
            auto res = run_line([&](int k) { return at(i, k); }, nx + 1);
            for (int k = 0; k <= nx; ++k) at(i, k) = res[static_cast<std::size_t>(k)];
        }
        // columns (s direction)
        for (int j = 0; j <= nx; ++j) {
            auto res = run_line([&](int k) { return at(k, j); }, ns + 1);
            for (int k = 0; k <= ns; ++k) at(k, j) = res[static_cast<std::size_t>(k)];
        }
        // diagonals (+1,+1)
        for (int d = -nx; d <= ns; ++d) {
            int i0 = std::max(0, d), j0 = i0 - d;
            int len = std::min(ns - i0, nx - j0) + 1;
            if (len < 3) continue;
            auto res = run_line([&](int k) { return at(i0 + k, j0 + k); }, len);
            for (int k = 0; k < len; ++k) at(i0 + k, j0 + k) = res[static_cast<std::size_t>(k)];
        }
        // diagonals (+1,-1)
        for (int d = 0; d <= ns + nx; ++d) {
            int i0 = std::max(0, d - nx), j0 = d - i0;
            int len = std::min(ns - i0, j0) + 1;
            if (len < 3) continue;
            auto res = run_line([&](int k) { return at(i0 + k, j0 - k); }, len);
            for (int k = 0; k < len; ++k) at(i0 + k, j0 - k) = res[static_cast<std::size_t>(k)];
        }
        if (!changed) break;
    }
    return PLConvexFunction(grid, std::move(samples));
}

namespace {

// triangulation of the lifted grid in index coordinates; 2d predicates are
// exact integer arithmetic
struct Tri {
    int v[3];   // node ids, counterclockwise
    int nb[3];  // neighbor across the edge opposite v[k], -1 on the boundary
};

struct Lift {
    const GridBox2* grid;
    const std::vector<double>* z;
    int ni(int node) const { return node / (grid->nx + 1); }
    int nj(int node) const { return node % (grid->nx + 1); }
    double zv(int node) const { return (*z)[static_cast<std::size_t>(node)]; }
};

std::int64_t cross2(const Lift& L, int a, int b, int c) {
    std::int64_t bx = L.ni(b) - L.ni(a), by = L.nj(b) - L.nj(a);
    std::int64_t cx = L.ni(c) - L.ni(a), cy = L.nj(c) - L.nj(a);
    return bx * cy - by * cx;
}

// lifted orientation: positive when d lies above the plane through a, b, c
// (a,b,c counterclockwise in the base)
double lifted_det(const Lift& L, int a, int b, int c, int d) {
    double bx = L.ni(b) - L.ni(a), by = L.nj(b) - L.nj(a), bz = L.zv(b) - L.zv(a);
    double cx = L.ni(c) - L.ni(a), cy = L.nj(c) - L.nj(a), cz = L.zv(c) - L.zv(a);
    double dx = L.ni(d) - L.ni(a), dy = L.nj(d) - L.nj(a), dz = L.zv(d) - L.zv(a);
    return bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx);
}

class EnvelopeTriangulation {
public:
    EnvelopeTriangulation(const PLConvexFunction& f) : lift_{&f.grid(), &f.values()} {
        const GridBox2& g = f.grid();
        tris_.reserve(static_cast<std::size_t>(2) * g.ns * g.nx);
        for (int i = 0; i < g.ns; ++i)
            for (int j = 0; j < g.nx; ++j) {
                int a = g.node_id(i, j), b = g.node_id(i + 1, j);
                int c = g.node_id(i + 1, j + 1), d = g.node_id(i, j + 1);
                tris_.push_back({{a, b, c}, {-1, -1, -1}});
                tris_.push_back({{a, c, d}, {-1, -1, -1}});
            }
        link_neighbors();
        flip_to_convexity(f);
    }

    const std::vector<Tri>& triangles() const { return tris_; }
    const Lift& lift() const { return lift_; }

private:
    void link_neighbors() {
        // edge (min,max) -> encoded (tri,k)
        std::unordered_map<std::int64_t, int> open;
        open.reserve(tris_.size() * 2);
        auto key = [](int u, int v) {
            if (u > v) std::swap(u, v);
            return (static_cast<std::int64_t>(u) << 32) | static_cast<std::int64_t>(v);
        };
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            for (int k = 0; k < 3; ++k) {
                int u = tris_[t].v[(k + 1) % 3], v = tris_[t].v[(k + 2) % 3];
                auto it = open.find(key(u, v));
                if (it == open.end()) {
                    open[key(u, v)] = (static_cast<int>(t) << 2) | k;
                } else {
                    int other = it->second >> 2, ok = it->second & 3;
                    tris_[t].nb[k] = other;
                    tris_[static_cast<std::size_t>(other)].nb[ok] = static_cast<int>(t);
                    open.erase(it);
                }
            }
        }
    }

    void flip_to_convexity(const PLConvexFunction& f) {
        double zscale = 1.0;
        for (double v : f.values()) zscale = std::max(zscale, std::abs(v));
        const double tol = 1e-12 * zscale;

        std::deque<std::pair<int, int>> queue;  // (tri, edge k)
        for (std::size_t t = 0; t < tris_.size(); ++t)
            for (int k = 0; k < 3; ++k)
                if (tris_[t].nb[k] >= 0) queue.emplace_back(static_cast<int>(t), k);

        const long cap = 200L * static_cast<long>(tris_.size());
        long flips = 0;
        while (!queue.empty() && flips < cap) {
            auto [t, k] = queue.front();
            queue.pop_front();
            int u = tris_[static_cast<std::size_t>(t)].nb[k];
            if (u < 0) continue;
            Tri& T = tris_[static_cast<std::size_t>(t)];
            Tri& U = tris_[static_cast<std::size_t>(u)];
            int a = T.v[k], b = T.v[(k + 1) % 3], c = T.v[(k + 2) % 3];
            // locate the shared edge (b,c) in U; d is U's opposite vertex
            int uk = -1;
            for (int m = 0; m < 3; ++m)
                if (U.v[(m + 1) % 3] == c && U.v[(m + 2) % 3] == b) uk = m;
            if (uk < 0) continue;  // stale queue entry
            int d = U.v[uk];
            double scale = std::abs(static_cast<double>(cross2(lift_, a, b, c))) + 1.0;
            if (lifted_det(lift_, a, b, c, d) >= -tol * scale) continue;  // locally convex
            // flip legality: the quad a,b,d,c must be strictly convex
            if (cross2(lift_, a, b, d) <= 0 || cross2(lift_, a, d, c) <= 0) continue;
            // replace (a,b,c),(d,c,b) with (a,b,d),(a,d,c)
            int nb_ab = T.nb[(k + 2) % 3], nb_ca = T.nb[(k + 1) % 3];
            int nb_db = U.nb[(uk + 1) % 3], nb_cd = U.nb[(uk + 2) % 3];
            T = {{a, b, d}, {nb_db, u, nb_ab}};
            U = {{a, d, c}, {nb_cd, nb_ca, t}};
            relink(nb_ab, t);
            relink(nb_db, t);
            relink(nb_ca, u);
            relink(nb_cd, u);
            ++flips;
            queue.emplace_back(t, 0);
            queue.emplace_back(t, 2);
            queue.emplace_back(u, 0);
            queue.emplace_back(u, 1);
        }
    }

    // refresh the back-pointer of neighbor `other` to point at triangle `self`
    void relink(int other, int self) {
        if (other < 0) return;
        Tri& O = tris_[static_cast<std::size_t>(other)];
        Tri& S = tris_[static_cast<std::size_t>(self)];
        for (int k = 0; k < 3; ++k) {
            int u = O.v[(k + 1) % 3], v = O.v[(k + 2) % 3];
            // shared edge appears with opposite orientation in S
            for (int m = 0; m < 3; ++m) {
                if (S.v[(m + 1) % 3] == v && S.v[(m + 2) % 3] == u) {
                    O.nb[k] = self;
                    S.nb[m] = other;
                }
            }
        }
    }

    Lift lift_;
    std::vector<Tri> tris_;
};

Vec triangle_gradient(const GridBox2& g, const std::vector<double>& z, const Tri& t) {
    auto sp = [&](int node) { return g.s_at(node / (g.nx + 1)); };
    auto xp = [&](int node) { return g.x_at(node % (g.nx + 1)); };
    double sa = sp(t.v[0]), xa = xp(t.v[0]), za = z[static_cast<std::size_t>(t.v[0])];
    double sb = sp(t.v[1]), xb = xp(t.v[1]), zb = z[static_cast<std::size_t>(t.v[1])];
    double sc = sp(t.v[2]), xc = xp(t.v[2]), zc = z[static_cast<std::size_t>(t.v[2])];
    double det = (sb - sa) * (xc - xa) - (xb - xa) * (sc - sa);
    Vec p(2);
    p[0] = ((zb - za) * (xc - xa) - (zc - za) * (xb - xa)) / det;
    p[1] = ((zc - za) * (sb - sa) - (zb - za) * (sc - sa)) / det;
    return p;
}

template <bool Parallel>
MADecomposition measure_impl(const PLConvexFunction& f) {
    const GridBox2& g = f.grid();
    EnvelopeTriangulation env(f);
    const auto& tris = env.triangles();

    // vertex -> incident triangles
    std::vector<std::vector<int>> incident(static_cast<std::size_t>(g.node_count()));
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int k = 0; k < 3; ++k)
            incident[static_cast<std::size_t>(tris[t].v[k])].push_back(static_cast<int>(t));

    std::vector<double> grads_s(tris.size()), grads_x(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        Vec p = triangle_gradient(g, f.values(), tris[t]);
        grads_s[t] = p[0];
        grads_x[t] = p[1];
    }

    std::vector<double> mass(static_cast<std::size_t>(g.node_count()), 0.0);
    auto body = [&](std::size_t node) {
        int i = static_cast<int>(node) / (g.nx + 1), j = static_cast<int>(node) % (g.nx + 1);
        if (i == 0 || i == g.ns || j == 0 || j == g.nx) return;  // boundary excluded
        auto& inc = incident[node];
        if (inc.size() < 3) return;
        // fan order by centroid angle around the vertex (index coordinates)
        std::vector<std::pair<double, int>> order;
        order.reserve(inc.size());
        for (int t : inc) {
            const Tri& T = tris[static_cast<std::size_t>(t)];
            double ci = 0, cj = 0;
            for (int k = 0; k < 3; ++k) {
                ci += T.v[k] / (g.nx + 1);
                cj += T.v[k] % (g.nx + 1);
            }
            ci = ci / 3.0 - i;
            cj = cj / 3.0 - j;
            order.emplace_back(std::atan2(cj, ci), t);
        }
        std::sort(order.begin(), order.end());
        // polar polygon: gradients of the incident facets, shoelace area
        double area2 = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::size_t k2 = (k + 1) % order.size();
            double as = grads_s[static_cast<std::size_t>(order[k].second)];
            double ax = grads_x[static_cast<std::size_t>(order[k].second)];
            double bs = grads_s[static_cast<std::size_t>(order[k2].second)];
            double bx = grads_x[static_cast<std::size_t>(order[k2].second)];
            area2 += as * bx - ax * bs;
        }
        mass[node] = std::max(0.0, 0.5 * area2);
    };
    if constexpr (Parallel)
        parallel_for(static_cast<std::size_t>(g.node_count()), body);
    else
        serial_for(static_cast<std::size_t>(g.node_count()), body);

    MADecomposition out;
    std::vector<double> nonzero;
    for (int node = 0; node < g.node_count(); ++node) {
        if (mass[static_cast<std::size_t>(node)] <= 0) continue;
        int i = node / (g.nx + 1), j = node % (g.nx + 1);
        out.atoms.push_back({i, j, g.s_at(i), g.x_at(j), mass[static_cast<std::size_t>(node)], false});
        nonzero.push_back(mass[static_cast<std::size_t>(node)]);
    }
    out.total_mass = neumaier_sum(nonzero);
    out.regular_mass = out.total_mass;
    out.singular_mass = 0;
    return out;
}

}  // namespace

MADecomposition alexandrov_measure(const PLConvexFunction& f) { return measure_impl<true>(f); }

MADecomposition alexandrov_measure_serial(const PLConvexFunction& f) {
    return measure_impl<false>(f);
}

std::pair<double, double> mass_split(MADecomposition& decomposition,
                                     const SingularIndicator2& singular) {
    std::vector<double> sing;
    for (auto& atom : decomposition.atoms) {
        atom.singular = singular(atom.s, atom.x);
        if (atom.singular) sing.push_back(atom.mass);
    }
    decomposition.singular_mass = neumaier_sum(sing);
    decomposition.regular_mass = decomposition.total_mass - decomposition.singular_mass;
    return {decomposition.regular_mass, decomposition.singular_mass};
}

void save_ma_csv(const MADecomposition& decomposition, const std::string& path) {
    CsvWriter csv(path, {"s", "x", "mass", "singular_flag"});
    for (const auto& atom : decomposition.atoms)
        csv.row({format_full(atom.s), format_full(atom.x), format_full(atom.mass),
                 atom.singular ? "1" : "0"});
    csv.close();
}

MCMeasure alexandrov_measure_mc(const std::vector<Vec>& nodes, const std::vector<double>& values,
                                const std::vector<bool>& interior,
                                const std::function<bool(std::size_t)>& singular_node,
                                const Vec& slope_lo, const Vec& slope_hi, std::uint64_t seed,
                                int samples) {
    if (nodes.empty() || nodes.size() != values.size() || nodes.size() != interior.size())
        throw std::invalid_argument("alexandrov_measure_mc: inconsistent inputs");
    const Eigen::Index m = nodes[0].size();
    double box_volume = 1;
    for (Eigen::Index d = 0; d < m; ++d) box_volume *= std::max(0.0, slope_hi[d] - slope_lo[d]);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    long hits = 0, sing_hits = 0;
    Vec p(m);
    for (int it = 0; it < samples; ++it) {
        for (Eigen::Index d = 0; d < m; ++d)
            p[d] = slope_lo[d] + (slope_hi[d] - slope_lo[d]) * uni(rng);
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            double v = p.dot(nodes[k]) - values[k];
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        if (interior[arg]) {
            ++hits;
            if (singular_node(arg)) ++sing_hits;
        }
    }
    MCMeasure out;
    double frac = static_cast<double>(hits) / samples;
    out.total_mass = frac * box_volume;
    out.singular_mass = static_cast<double>(sing_hits) / samples * box_volume;
    out.ci_halfwidth = 1.96 * std::sqrt(std::max(frac * (1 - frac), 0.0) / samples) * box_volume;
    out.samples = samples;
    return out;
}

}  // namespace hrma
