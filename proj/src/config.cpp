#include "hrma/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hrma/io.hpp"

namespace hrma {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    return out;
}

double to_double(const std::string& key, const std::string& v, std::vector<std::string>& errs) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        errs.push_back(key + ": not a number ('" + v + "')");
        return 0;
    }
}

int to_int(const std::string& key, const std::string& v, std::vector<std::string>& errs) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        errs.push_back(key + ": not an integer ('" + v + "')");
        return 0;
    }
}

bool to_bool(const std::string& key, const std::string& v, std::vector<std::string>& errs) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    errs.push_back(key + ": not a boolean ('" + v + "')");
    return false;
}

}  // namespace

StudyConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> errs;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errs.push_back(origin + ":" + std::to_string(lineno) + ": malformed section");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errs.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = section + "." + trim(line.substr(0, eq));
        kv[key] = trim(line.substr(eq + 1));
    }

    StudyConfig cfg;
    std::vector<std::string> unknown;
    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };

    static const std::vector<std::string> known = {
        "problem.polytope",   "problem.u0_smooth",  "problem.velocity",
        "study.n_ladder",     "study.t_max",        "study.s_step",
        "study.x_window",     "study.x_step",       "ma.resolutions",
        "ma.t_values",        "ma.mc_samples",      "numerics.quad_rel_tol",
        "numerics.legendre_coarse", "numerics.sing_tol", "output.dir",
        "output.plots",       "run.seed",           "run.threads"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            unknown.push_back(key);
    }
    for (const auto& key : unknown) errs.push_back("unknown key: " + key);

    if (const auto* v = take("problem.polytope")) cfg.polytope = *v;
    if (const auto* v = take("problem.u0_smooth")) cfg.u0_smooth = *v;
    if (const auto* v = take("problem.velocity")) cfg.velocity = *v;
    if (const auto* v = take("study.n_ladder")) {
        cfg.n_ladder.clear();
        for (const auto& c : split(*v, ',')) cfg.n_ladder.push_back(to_int("study.n_ladder", c, errs));
    }
    if (const auto* v = take("study.t_max")) cfg.t_max = to_double("study.t_max", *v, errs);
    if (const auto* v = take("study.s_step")) cfg.s_step = to_double("study.s_step", *v, errs);
    if (const auto* v = take("study.x_window")) cfg.x_window = to_double("study.x_window", *v, errs);
    if (const auto* v = take("study.x_step")) cfg.x_step = to_double("study.x_step", *v, errs);
    if (const auto* v = take("ma.resolutions")) {
        cfg.ma_resolutions.clear();
        for (const auto& c : split(*v, ','))
            cfg.ma_resolutions.push_back(to_int("ma.resolutions", c, errs));
    }
    if (const auto* v = take("ma.t_values")) {
        cfg.ma_t_values.clear();
        for (const auto& c : split(*v, ','))
            cfg.ma_t_values.push_back(to_double("ma.t_values", c, errs));
    }
    if (const auto* v = take("ma.mc_samples")) cfg.mc_samples = to_int("ma.mc_samples", *v, errs);
    if (const auto* v = take("numerics.quad_rel_tol"))
        cfg.quad_rel_tol = to_double("numerics.quad_rel_tol", *v, errs);
    if (const auto* v = take("numerics.legendre_coarse"))
        cfg.legendre_coarse = to_int("numerics.legendre_coarse", *v, errs);
    if (const auto* v = take("numerics.sing_tol")) cfg.sing_tol = to_double("numerics.sing_tol", *v, errs);
    if (const auto* v = take("output.dir")) cfg.out_dir = *v;
    if (const auto* v = take("output.plots")) cfg.plots = to_bool("output.plots", *v, errs);
    if (const auto* v = take("run.seed")) cfg.seed = static_cast<std::uint64_t>(std::stoull(*v));
    if (const auto* v = take("run.threads")) cfg.threads = to_int("run.threads", *v, errs);

    // validation; every offending key is reported
    if (cfg.polytope.empty()) errs.push_back("missing required key: problem.polytope");
    if (cfg.velocity.empty()) errs.push_back("missing required key: problem.velocity");
    if (cfg.n_ladder.empty()) errs.push_back("study.n_ladder: must be nonempty");
    for (std::size_t i = 0; i + 1 < cfg.n_ladder.size(); ++i)
        if (cfg.n_ladder[i] >= cfg.n_ladder[i + 1]) {
            errs.push_back("study.n_ladder: values must be strictly increasing");
            break;
        }
    for (int N : cfg.n_ladder)
        if (N < 1) {
            errs.push_back("study.n_ladder: levels must be positive");
            break;
        }
    if (!(cfg.t_max > 0)) errs.push_back("study.t_max: must be positive");
    if (!(cfg.s_step > 0)) errs.push_back("study.s_step: must be positive");
    if (!(cfg.x_step > 0)) errs.push_back("study.x_step: must be positive");
    if (!(cfg.x_window > 0)) errs.push_back("study.x_window: must be positive");
    if (cfg.ma_resolutions.empty()) errs.push_back("ma.resolutions: must be nonempty");
    for (int r : cfg.ma_resolutions)
        if (r < 2) {
            errs.push_back("ma.resolutions: must be >= 2");
            break;
        }
    if (!(cfg.quad_rel_tol > 0)) errs.push_back("numerics.quad_rel_tol: must be positive");
    if (cfg.legendre_coarse < 8) errs.push_back("numerics.legendre_coarse: must be >= 8");

    if (!errs.empty()) {
        std::string msg = "config validation failed (" + origin + "):";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

StudyConfig parse_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config_text(text, path);
}

namespace {

std::vector<Monomial> poly_1d_from_coeffs(const std::vector<double>& coeffs) {
    std::vector<Monomial> terms;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == 0) continue;
        terms.push_back({coeffs[k], {static_cast<int>(k)}});
    }
    if (terms.empty()) terms.push_back({0.0, {0}});
    return terms;
}

ScalarFieldOnP field_from_spec(std::shared_ptr<const DelzantPolytope> P, const std::string& spec,
                               bool allow_bump) {
    const int n = P->dimension();
    if (allow_bump && spec == "bump") {
        if (n != 1) throw ConfigError("velocity 'bump' requires the segment (n = 1)");
        // y(1-y) = y - y^2
        return polynomial_field(P, {{1.0, {1}}, {-1.0, {2}}});
    }
    if (spec.rfind("constant:", 0) == 0) {
        return constant_field(P, std::stod(spec.substr(9)));
    }
    if (spec.rfind("linear:", 0) == 0) {
        auto parts = split(spec.substr(7), ',');
        if (static_cast<int>(parts.size()) != n + 1)
            throw ConfigError("linear velocity needs n slope entries plus a constant");
        Vec a(n);
        for (int i = 0; i < n; ++i) a[i] = std::stod(parts[static_cast<std::size_t>(i)]);
        return affine_field(P, a, std::stod(parts.back()));
    }
    if (spec.rfind("poly:", 0) == 0) {
        if (n != 1) throw ConfigError("'poly:' coefficient lists are one-dimensional; use 'monomials:'");
        std::vector<double> coeffs;
        for (const auto& c : split(spec.substr(5), ',')) coeffs.push_back(std::stod(c));
        return polynomial_field(P, poly_1d_from_coeffs(coeffs));
    }
    if (spec.rfind("monomials:", 0) == 0) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec.substr(10));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("monomials JSON parse error: ") + e.what());
        }
        std::vector<Monomial> terms;
        for (const auto& row : j) {
            if (static_cast<int>(row.size()) != n + 1)
                throw ConfigError("each monomial row needs a coefficient plus n exponents");
            Monomial m;
            m.coeff = row[0].get<double>();
            for (int i = 0; i < n; ++i) m.exponents.push_back(row[static_cast<std::size_t>(i) + 1].get<int>());
            terms.push_back(m);
        }
        return polynomial_field(P, terms);
    }
    throw ConfigError("unrecognized field spec: '" + spec + "'");
}

}  // namespace

ScalarFieldOnP velocity_field_from_spec(std::shared_ptr<const DelzantPolytope> P,
                                        const std::string& spec) {
    return field_from_spec(std::move(P), spec, true);
}

ScalarFieldOnP smooth_part_from_spec(std::shared_ptr<const DelzantPolytope> P,
                                     const std::string& spec) {
    if (spec == "none") return constant_field(std::move(P), 0.0);
    return field_from_spec(std::move(P), spec, false);
}

ProblemData problem_from_config(const StudyConfig& config) {
    std::shared_ptr<const DelzantPolytope> P;
    try {
        P = make_polytope(config.polytope);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("problem.polytope: ") + e.what());
    }
    ScalarFieldOnP u0 = guillemin_field(P);
    if (config.u0_smooth != "none") u0 = field_sum(u0, smooth_part_from_spec(P, config.u0_smooth));
    ScalarFieldOnP udot0 = velocity_field_from_spec(P, config.velocity);
    LegendreOptions legendre;
    legendre.coarse_per_dim = config.legendre_coarse;
    return make_problem(P, u0, udot0, config.quad_rel_tol, legendre);
}

}  // namespace hrma
