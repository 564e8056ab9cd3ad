// Study configuration: a flat sectioned key/value text file. Velocities and
// smooth parts are polynomial coefficient tables in y or named presets;
// polytopes are presets or inline JSON facet data.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrma/geodesic.hpp"

namespace hrma {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct StudyConfig {
    // [problem]
    std::string polytope = "";        // preset name or inline {"normals":..,"offsets":..}
    std::string u0_smooth = "none";   // smooth part F added to the Guillemin potential
    std::string velocity = "";        // "bump" | "linear:a,b" | "poly:c0,c1,.." | "monomials:[..]"

    // [study]
    std::vector<int> n_ladder{8, 16, 32, 64, 128};
    double t_max = 3.0;
    double s_step = 0.05;
    double x_window = 8.0;
    double x_step = 0.1;

    // [ma]
    std::vector<int> ma_resolutions{128, 256, 512};
    std::vector<double> ma_t_values{1.5, 3.0};
    int mc_samples = 200000;

    // [numerics]
    double quad_rel_tol = 1e-12;
    int legendre_coarse = 2048;
    double sing_tol = 0;  // 0 = derive from the refinement spacing / grid

    // [output]
    std::string out_dir = "out";
    bool plots = false;

    // [run]
    std::uint64_t seed = 20240901;  // Monte Carlo fallback only
    int threads = 0;
};

StudyConfig parse_config(const std::string& path);
StudyConfig parse_config_text(const std::string& text, const std::string& origin);

// velocity / smooth-part specs to fields
ScalarFieldOnP velocity_field_from_spec(std::shared_ptr<const DelzantPolytope> P,
                                        const std::string& spec);
ScalarFieldOnP smooth_part_from_spec(std::shared_ptr<const DelzantPolytope> P,
                                     const std::string& spec);

ProblemData problem_from_config(const StudyConfig& config);

}  // namespace hrma
