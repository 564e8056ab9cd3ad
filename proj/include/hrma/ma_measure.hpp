// Alexandrov Monge-Ampere measures of piecewise-linear convex functions on a
// rectangular (s,x) grid. The measure of a PL convex function is purely
// atomic at the vertices of its lower envelope; the mass of a vertex equals
// the area of the polygon spanned by the gradients of the adjacent envelope
// facets (the planar lower-hull dual). Exact computation is restricted to
// m = 2; higher m falls back to Monte Carlo estimation of the gradient-image
// measure.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hrma/types.hpp"

namespace hrma {

struct GridBox2 {
    double s0 = 0, s1 = 1;    // first axis (geodesic time in the audits)
    double x0 = -1, x1 = 1;   // second axis
    int ns = 1, nx = 1;       // cell counts; nodes are (ns+1) x (nx+1)

    double hs() const { return (s1 - s0) / ns; }
    double hx() const { return (x1 - x0) / nx; }
    double s_at(int i) const { return s0 + i * hs(); }
    double x_at(int j) const { return x0 + j * hx(); }
    int node_count() const { return (ns + 1) * (nx + 1); }
    int node_id(int i, int j) const { return i * (nx + 1) + j; }
};

class PLConvexFunction {
public:
    // values in row-major node order [i*(nx+1)+j]; the constructor does not
    // convexify, see pl_convexify
    PLConvexFunction(GridBox2 grid, std::vector<double> values);

    const GridBox2& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double value_at(int i, int j) const { return values_[static_cast<std::size_t>(grid_.node_id(i, j))]; }

    // midpoint inequality along every grid row, column and diagonal
    bool satisfies_edge_convexity(double tol = 1e-12) const;

private:
    GridBox2 grid_;
    std::vector<double> values_;
};

// Lower convex envelope of the samples restricted to the grid, computed by
// iterated one-dimensional lower hulls along rows, columns and the two
// diagonal directions until a fixed point. Convex input is returned
// unchanged.
PLConvexFunction pl_convexify(const GridBox2& grid, std::vector<double> samples);

struct MAAtom {
    int i = 0, j = 0;
    double s = 0, x = 0;
    double mass = 0;
    bool singular = false;
};

struct MADecomposition {
    std::vector<MAAtom> atoms;  // interior vertices with positive mass
    double total_mass = 0;
    double singular_mass = 0;
    double regular_mass = 0;
};

// Exact Alexandrov measure of the envelope: Lawson flips bring the lifted
// grid triangulation to local convexity, then every interior vertex gets the
// area of its polar gradient polygon. Boundary vertices are excluded from
// the reported masses.
MADecomposition alexandrov_measure(const PLConvexFunction& f);          // parallel polar areas
MADecomposition alexandrov_measure_serial(const PLConvexFunction& f);   // reference

using SingularIndicator2 = std::function<bool(double s, double x)>;

// splits total mass by the indicator; updates atom flags and the sums,
// returns (regular_mass, singular_mass)
std::pair<double, double> mass_split(MADecomposition& decomposition,
                                     const SingularIndicator2& singular);

void save_ma_csv(const MADecomposition& decomposition, const std::string& path);

// Monte Carlo fallback for m >= 3: slopes sampled uniformly in the bounding
// box of the observed gradients (per-cell difference quotients, supplied by
// the caller); a slope hits when its Legendre argmax over the nodes is an
// interior node, and mass = hit fraction x box volume.
struct MCMeasure {
    double total_mass = 0;
    double singular_mass = 0;
    double ci_halfwidth = 0;  // 95% on the total
    int samples = 0;
};

MCMeasure alexandrov_measure_mc(const std::vector<Vec>& nodes, const std::vector<double>& values,
                                const std::vector<bool>& interior,
                                const std::function<bool(std::size_t)>& singular_node,
                                const Vec& slope_lo, const Vec& slope_hi, std::uint64_t seed,
                                int samples);

}  // namespace hrma
