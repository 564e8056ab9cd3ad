// Delzant lattice polytopes: facet data, membership, lattice-point
// enumeration, and the Guillemin canonical symplectic potential
//   u_G(y) = sum_k l_k(y) log l_k(y),   l_j(y) = <y, v_j> - lambda_j.
//
// Facet inequalities are the primary representation; vertices are derived by
// exact rational arithmetic for n <= 2. A polytope is immutable after
// construction and safe to share across workers.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hrma/types.hpp"

namespace hrma {

struct GuilleminJet {
    double value;
    Vec gradient;
    Mat hessian;
};

class DelzantPolytope {
public:
    // facet j is the half-space l_j(y) = <y, normal_j> - offset_j >= 0, with
    // primitive integer normals. Throws std::invalid_argument when the data
    // is not a valid Delzant polytope (see validate() in the implementation).
    DelzantPolytope(std::vector<LVec> normals, std::vector<std::int64_t> offsets);

    int dimension() const { return n_; }
    int facet_count() const { return static_cast<int>(normals_.size()); }
    const LVec& normal(int j) const { return normals_[static_cast<std::size_t>(j)]; }
    std::int64_t offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }

    double facet_value(int j, const Vec& y) const;
    Vec facet_values(const Vec& y) const;

    // membership with tolerance l_j(y) >= -1e-12 * (1 + |lambda_j|)
    bool contains(const Vec& y) const;
    bool strictly_inside(const Vec& y) const;

    // Euclidean distance to the boundary, min_j l_j(y) / |v_j|; negative
    // (signed) for points outside P.
    double boundary_distance(const Vec& y) const;

    // vertices, lexicographically sorted (exact rational solve, n <= 2)
    const std::vector<Vec>& vertices() const { return vertices_; }
    Vec bounding_box_min() const { return bbox_min_; }
    Vec bounding_box_max() const { return bbox_max_; }
    double diameter() const;
    Vec interior_point() const;  // vertex centroid

    // Guillemin potential with gradient sum_k (1 + log l_k) v_k and hessian
    // sum_k v_k v_k^T / l_k; requires y strictly interior (throws
    // std::domain_error otherwise).
    GuilleminJet guillemin(const Vec& y) const;

    // continuous extension of u_G to the closed polytope (l log l -> 0)
    double guillemin_value(const Vec& y) const;

    // nonempty when the Delzant vertex check was skipped (n > 2)
    const std::string& warning() const { return warning_; }

    // canonical text form, used in cache signatures
    std::string describe() const;

private:
    void validate();

    int n_;
    std::vector<LVec> normals_;
    std::vector<std::int64_t> offsets_;
    std::vector<Vec> vertices_;
    Vec bbox_min_, bbox_max_;
    std::string warning_;
};

struct LatticeSet {
    int level = 0;                 // N
    std::vector<LVec> points;      // alpha with alpha/N in P, lexicographic
};

// all alpha in Z^n with alpha/N in P; the filter is exact integer arithmetic
LatticeSet lattice_points(const DelzantPolytope& P, int N);

// presets: "segment" ([0,1]), "square", "simplex2"
std::shared_ptr<const DelzantPolytope> make_polytope_preset(const std::string& name);

// inline form {"normals": [[...],...], "offsets": [...]}
std::shared_ptr<const DelzantPolytope> make_polytope_json(const std::string& json_text);

// dispatches on preset name vs inline JSON
std::shared_ptr<const DelzantPolytope> make_polytope(const std::string& spec);

}  // namespace hrma
