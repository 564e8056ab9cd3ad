#include "hrma/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hrma {

namespace {

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    a = std::abs(a);
    b = std::abs(b);
    while (b) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// exact rational with small int64 numerators; all inputs here are tiny
struct Rat {
    std::int64_t num = 0, den = 1;
    Rat() = default;
    Rat(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t g = gcd64(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

bool rat_less(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }
bool rat_eq(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }

}  // namespace

DelzantPolytope::DelzantPolytope(std::vector<LVec> normals, std::vector<std::int64_t> offsets)
    : normals_(std::move(normals)), offsets_(std::move(offsets)) {
    if (normals_.empty()) throw std::invalid_argument("polytope: no facets");
    if (normals_.size() != offsets_.size())
        throw std::invalid_argument("polytope: normals/offsets size mismatch");
    n_ = static_cast<int>(normals_[0].size());
    if (n_ < 1) throw std::invalid_argument("polytope: dimension must be positive");
    for (const auto& v : normals_)
        if (static_cast<int>(v.size()) != n_)
            throw std::invalid_argument("polytope: inconsistent normal dimensions");
    validate();
}

void DelzantPolytope::validate() {
    // primitivity of the normals
    for (const auto& v : normals_) {
        std::int64_t g = 0;
        for (int i = 0; i < n_; ++i) g = gcd64(g, v[i]);
        if (g != 1) throw std::invalid_argument("polytope: facet normal is not primitive");
    }

    if (n_ > 2) {
        warning_ = "Delzant vertex check skipped for dimension > 2";
        bbox_min_ = Vec::Zero(n_);
        bbox_max_ = Vec::Zero(n_);
        return;
    }

    const int d = facet_count();

    // boundedness: the outward normals must positively span R^n
    if (n_ == 1) {
        bool pos = false, neg = false;
        for (const auto& v : normals_) {
            if (v[0] > 0) pos = true;
            if (v[0] < 0) neg = true;
        }
        if (!pos || !neg) throw std::invalid_argument("polytope: unbounded (normals do not span)");
    } else {
        std::vector<double> angles;
        for (const auto& v : normals_)
            angles.push_back(std::atan2(static_cast<double>(v[1]), static_cast<double>(v[0])));
        std::sort(angles.begin(), angles.end());
        double max_gap = 2 * M_PI - (angles.back() - angles.front());
        for (std::size_t i = 1; i < angles.size(); ++i)
            max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
        if (max_gap >= M_PI - 1e-12)
            throw std::invalid_argument("polytope: unbounded (normals do not span)");
    }

    // vertex enumeration by exact rational facet intersections
    if (n_ == 1) {
        std::vector<Rat> lo, hi;
        for (int j = 0; j < d; ++j) {
            // v*y >= lambda: lower bound if v>0 else upper bound
            if (normals_[j][0] > 0)
                lo.emplace_back(offsets_[j], normals_[j][0]);
            else
                hi.emplace_back(offsets_[j], normals_[j][0]);
        }
        Rat a = lo[0], b = hi[0];
        for (const auto& r : lo)
            if (rat_less(a, r)) a = r;
        for (const auto& r : hi)
            if (rat_less(r, b)) b = r;
        if (!rat_less(a, b)) throw std::invalid_argument("polytope: empty or degenerate interval");
        vertices_ = {vec1(a.to_double()), vec1(b.to_double())};
        // Delzant in 1d: each endpoint on exactly one facet with |v| = 1
        // (primitivity already forces |v| = 1)
    } else {
        struct ExactVertex {
            Rat y0, y1;
            std::vector<int> facets;
        };
        std::vector<ExactVertex> verts;
        for (int a = 0; a < d; ++a) {
            for (int b = a + 1; b < d; ++b) {
                const LVec &va = normals_[a], &vb = normals_[b];
                std::int64_t det = va[0] * vb[1] - va[1] * vb[0];
                if (det == 0) continue;
                // Cramer: y = ([la vb1 - lb va1], [va0 lb - vb0 la]) / det
                Rat y0(offsets_[a] * vb[1] - offsets_[b] * va[1], det);
                Rat y1(va[0] * offsets_[b] - vb[0] * offsets_[a], det);
                // exact feasibility against all facets
                bool ok = true;
                std::vector<int> active;
                for (int j = 0; j < d && ok; ++j) {
                    // l_j = v0*y0 + v1*y1 - lambda, with common denominator
                    std::int64_t den = y0.den * y1.den;
                    std::int64_t num = normals_[j][0] * y0.num * y1.den +
                                       normals_[j][1] * y1.num * y0.den - offsets_[j] * den;
                    if (num < 0) ok = false;
                    if (num == 0) active.push_back(j);
                }
                if (!ok) continue;
                bool dup = false;
                for (const auto& w : verts)
                    if (rat_eq(w.y0, y0) && rat_eq(w.y1, y1)) dup = true;
                if (!dup) verts.push_back({y0, y1, active});
            }
        }
        if (verts.empty()) throw std::invalid_argument("polytope: empty (no vertices)");
        for (const auto& w : verts) {
            // Delzant condition (i): exactly n facets meet at each vertex,
            // and their normals span Z^2 (unimodular pair)
            if (w.facets.size() != 2)
                throw std::invalid_argument("polytope: vertex not on exactly n facets");
            const LVec &va = normals_[w.facets[0]], &vb = normals_[w.facets[1]];
            std::int64_t det = va[0] * vb[1] - va[1] * vb[0];
            if (det != 1 && det != -1)
                throw std::invalid_argument("polytope: vertex normals do not span Z^n");
        }
        std::sort(verts.begin(), verts.end(), [](const ExactVertex& p, const ExactVertex& q) {
            if (!rat_eq(p.y0, q.y0)) return rat_less(p.y0, q.y0);
            return rat_less(p.y1, q.y1);
        });
        for (const auto& w : verts) vertices_.push_back(vec2(w.y0.to_double(), w.y1.to_double()));
    }

    bbox_min_ = vertices_[0];
    bbox_max_ = vertices_[0];
    for (const auto& v : vertices_) {
        bbox_min_ = bbox_min_.cwiseMin(v);
        bbox_max_ = bbox_max_.cwiseMax(v);
    }
}

double DelzantPolytope::facet_value(int j, const Vec& y) const {
    const LVec& v = normals_[static_cast<std::size_t>(j)];
    double s = 0;
    for (int i = 0; i < n_; ++i) s += y[i] * static_cast<double>(v[i]);
    return s - static_cast<double>(offsets_[static_cast<std::size_t>(j)]);
}

Vec DelzantPolytope::facet_values(const Vec& y) const {
    if (static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("facet_values: point dimension mismatch");
    Vec out(facet_count());
    for (int j = 0; j < facet_count(); ++j) out[j] = facet_value(j, y);
    return out;
}

bool DelzantPolytope::contains(const Vec& y) const {
    if (static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("contains: point dimension mismatch");
    for (int j = 0; j < facet_count(); ++j) {
        double tol = 1e-12 * (1.0 + std::abs(static_cast<double>(offsets_[static_cast<std::size_t>(j)])));
        if (facet_value(j, y) < -tol) return false;
    }
    return true;
}

bool DelzantPolytope::strictly_inside(const Vec& y) const {
    for (int j = 0; j < facet_count(); ++j)
        if (facet_value(j, y) <= 0) return false;
    return true;
}

double DelzantPolytope::boundary_distance(const Vec& y) const {
    if (static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("boundary_distance: point dimension mismatch");
    double dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < facet_count(); ++j) {
        double norm = 0;
        const LVec& v = normals_[static_cast<std::size_t>(j)];
        for (int i = 0; i < n_; ++i) norm += static_cast<double>(v[i]) * static_cast<double>(v[i]);
        dist = std::min(dist, facet_value(j, y) / std::sqrt(norm));
    }
    return dist;
}

double DelzantPolytope::diameter() const {
    if (vertices_.empty()) throw std::runtime_error("polytope: vertices unavailable");
    double d = 0;
    for (std::size_t a = 0; a < vertices_.size(); ++a)
        for (std::size_t b = a + 1; b < vertices_.size(); ++b)
            d = std::max(d, (vertices_[a] - vertices_[b]).norm());
    return d;
}

Vec DelzantPolytope::interior_point() const {
    if (vertices_.empty()) throw std::runtime_error("polytope: vertices unavailable");
    Vec c = Vec::Zero(n_);
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
}

GuilleminJet DelzantPolytope::guillemin(const Vec& y) const {
    if (static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("guillemin: point dimension mismatch");
    GuilleminJet jet;
    jet.value = 0;
    jet.gradient = Vec::Zero(n_);
    jet.hessian = Mat::Zero(n_, n_);
    for (int j = 0; j < facet_count(); ++j) {
        double l = facet_value(j, y);
        if (l <= 0)
            throw std::domain_error("guillemin: point not strictly interior (facet value <= 0)");
        double lg = std::log(l);
        const LVec& vi = normals_[static_cast<std::size_t>(j)];
        Vec v(n_);
        for (int i = 0; i < n_; ++i) v[i] = static_cast<double>(vi[i]);
        jet.value += l * lg;
        jet.gradient += (1.0 + lg) * v;
        jet.hessian += (v * v.transpose()) / l;
    }
    return jet;
}

double DelzantPolytope::guillemin_value(const Vec& y) const {
    double s = 0;
    for (int j = 0; j < facet_count(); ++j) {
        double l = facet_value(j, y);
        double tol = 1e-12 * (1.0 + std::abs(static_cast<double>(offsets_[static_cast<std::size_t>(j)])));
        if (l < -tol) throw std::domain_error("guillemin_value: point outside the polytope");
        if (l > 0) s += l * std::log(l);
    }
    return s;
}

std::string DelzantPolytope::describe() const {
    std::string s = "polytope{n=" + std::to_string(n_) + ";";
    for (int j = 0; j < facet_count(); ++j) {
        s += "[";
        for (int i = 0; i < n_; ++i) {
            if (i) s += ",";
            s += std::to_string(normals_[static_cast<std::size_t>(j)][i]);
        }
        s += "]:" + std::to_string(offsets_[static_cast<std::size_t>(j)]) + ";";
    }
    s += "}";
    return s;
}

LatticeSet lattice_points(const DelzantPolytope& P, int N) {
    if (N < 1) throw std::invalid_argument("lattice_points: N must be >= 1");
    const int n = P.dimension();
    if (P.vertices().empty())
        throw std::runtime_error("lattice_points: vertex bounding box unavailable for n > 2");

    // bounding-box scan; +-1 margin absorbs rational rounding of the box
    std::vector<std::int64_t> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = static_cast<std::int64_t>(std::floor(P.bounding_box_min()[i] * N)) - 1;
        hi[i] = static_cast<std::int64_t>(std::ceil(P.bounding_box_max()[i] * N)) + 1;
    }

    LatticeSet set;
    set.level = N;
    LVec alpha(n);
    // exact filter: N * l_j(alpha/N) = <alpha, v_j> - N * lambda_j in Z
    auto feasible = [&](const LVec& a) {
        for (int j = 0; j < P.facet_count(); ++j) {
            std::int64_t s = 0;
            for (int i = 0; i < n; ++i) s += a[i] * P.normal(j)[i];
            if (s < static_cast<std::int64_t>(N) * P.offset(j)) return false;
        }
        return true;
    };

    if (n == 1) {
        for (std::int64_t a0 = lo[0]; a0 <= hi[0]; ++a0) {
            alpha[0] = a0;
            if (feasible(alpha)) set.points.push_back(alpha);
        }
    } else if (n == 2) {
        for (std::int64_t a0 = lo[0]; a0 <= hi[0]; ++a0)
            for (std::int64_t a1 = lo[1]; a1 <= hi[1]; ++a1) {
                alpha[0] = a0;
                alpha[1] = a1;
                if (feasible(alpha)) set.points.push_back(alpha);
            }
    } else {
        throw std::runtime_error("lattice_points: dimension > 2 not supported");
    }
    return set;
}

std::shared_ptr<const DelzantPolytope> make_polytope_preset(const std::string& name) {
    auto lv = [](std::initializer_list<std::int64_t> xs) {
        LVec v(static_cast<Eigen::Index>(xs.size()));
        int i = 0;
        for (auto x : xs) v[i++] = x;
        return v;
    };
    if (name == "segment") {
        return std::make_shared<DelzantPolytope>(std::vector<LVec>{lv({1}), lv({-1})},
                                                 std::vector<std::int64_t>{0, -1});
    }
    if (name == "square") {
        return std::make_shared<DelzantPolytope>(
            std::vector<LVec>{lv({1, 0}), lv({0, 1}), lv({-1, 0}), lv({0, -1})},
            std::vector<std::int64_t>{0, 0, -1, -1});
    }
    if (name == "simplex2") {
        return std::make_shared<DelzantPolytope>(
            std::vector<LVec>{lv({1, 0}), lv({0, 1}), lv({-1, -1})},
            std::vector<std::int64_t>{0, 0, -1});
    }
    throw std::invalid_argument("unknown polytope preset: " + name);
}

std::shared_ptr<const DelzantPolytope> make_polytope_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("polytope JSON parse error: ") + e.what());
    }
    if (!j.contains("normals") || !j.contains("offsets"))
        throw std::invalid_argument("polytope JSON must contain 'normals' and 'offsets'");
    std::vector<LVec> normals;
    for (const auto& row : j["normals"]) {
        LVec v(static_cast<Eigen::Index>(row.size()));
        int i = 0;
        for (const auto& x : row) v[i++] = x.get<std::int64_t>();
        normals.push_back(v);
    }
    std::vector<std::int64_t> offsets;
    for (const auto& x : j["offsets"]) offsets.push_back(x.get<std::int64_t>());
    return std::make_shared<DelzantPolytope>(std::move(normals), std::move(offsets));
}

std::shared_ptr<const DelzantPolytope> make_polytope(const std::string& spec) {
    if (!spec.empty() && spec.front() == '{') return make_polytope_json(spec);
    return make_polytope_preset(spec);
}

}  // namespace hrma
