#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace hrma {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// integer lattice vectors (facet normals, lattice points alpha)
using LVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

inline Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace hrma
