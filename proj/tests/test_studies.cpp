#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hrma/io.hpp"
#include "hrma/parallel.hpp"
#include "hrma/studies.hpp"

using namespace hrma;

namespace {

std::string tmp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("hrma_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

StudyConfig small_flagship(const std::string& out) {
    StudyConfig cfg = parse_config_text(
        "[problem]\npolytope = segment\nvelocity = bump\n"
        "[study]\nn_ladder = 2,4,8\nt_max = 1.0\ns_step = 0.25\nx_window = 3.0\nx_step = 0.5\n"
        "[ma]\nresolutions = 16,32\nt_values = 1.0,3.0\n",
        "inline");
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("convergence study emits consistent files") {
    std::string out = tmp_dir("conv");
    StudyConfig cfg = small_flagship(out);
    ConvergenceResult r = run_convergence_study(cfg);
    REQUIRE(r.ladder.size() == 3);
    CHECK(r.sup_errors[0] > r.sup_errors[1]);
    CHECK(r.sup_errors[1] > r.sup_errors[2]);
    CHECK(file_exists(out + "/summary.csv"));
    CHECK(file_exists(out + "/convergence_N8.csv"));

    // summary sup_error column is consistent with the emitted grid values
    std::ifstream in(out + "/convergence_N8.csv");
    std::string line;
    std::getline(in, line);  // header
    double sup = 0;
    while (std::getline(in, line)) {
        auto last = line.rfind(',');
        sup = std::max(sup, std::abs(std::stod(line.substr(last + 1))));
    }
    CHECK(sup == doctest::Approx(r.sup_errors[2]).epsilon(1e-15));
}

TEST_CASE("rerun produces byte-identical outputs across thread counts") {
    std::string out1 = tmp_dir("det1"), out2 = tmp_dir("det2");
    StudyConfig cfg = small_flagship(out1);
    set_threads(1);
    run_convergence_study(cfg);
    cfg.out_dir = out2;
    set_threads(4);
    run_convergence_study(cfg);
    set_threads(0);
    for (const char* name : {"/summary.csv", "/convergence_N2.csv", "/convergence_N8.csv"}) {
        CHECK(read_text_file(out1 + name) == read_text_file(out2 + name));
    }
}

TEST_CASE("spectral cache round trip feeds the study") {
    std::string out = tmp_dir("cache");
    StudyConfig cfg = small_flagship(out);
    auto files = run_spectral_cache(cfg);
    REQUIRE(files.size() == 3);
    for (const auto& f : files) CHECK(file_exists(f));

    // a cached rerun produces the same summary as a fresh one
    std::string fresh = tmp_dir("cache_fresh");
    StudyConfig cfg2 = small_flagship(fresh);
    ConvergenceResult direct = run_convergence_study(cfg2);
    std::string cached = tmp_dir("cache_use");
    cfg2.out_dir = cached;
    ConvergenceResult reused = run_convergence_study(cfg2, out);
    for (std::size_t i = 0; i < direct.sup_errors.size(); ++i)
        CHECK(direct.sup_errors[i] == reused.sup_errors[i]);
}

TEST_CASE("lifespan report") {
    std::string out = tmp_dir("life");
    StudyConfig cfg = small_flagship(out);
    LifespanResult r = run_lifespan_report(cfg);
    CHECK(r.t_cvx == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r.binding_point[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(file_exists(out + "/lifespan.csv"));
    CHECK(file_exists(out + "/mineig_profile.csv"));
    CHECK(file_exists(out + "/singular_scan.csv"));

    // infinite lifespan reported as "inf"
    std::string out2 = tmp_dir("life_inf");
    StudyConfig lin = parse_config_text(
        "[problem]\npolytope = segment\nvelocity = linear:1,0\n", "inline");
    lin.out_dir = out2;
    LifespanResult ri = run_lifespan_report(lin);
    CHECK(std::isinf(ri.t_cvx));
    std::string text = read_text_file(out2 + "/lifespan.csv");
    CHECK(text.find("t_cvx,inf") != std::string::npos);
}

TEST_CASE("ma audit on a small ladder") {
    std::string out = tmp_dir("ma");
    StudyConfig cfg = small_flagship(out);
    cfg.ma_resolutions = {32, 64};
    MAAuditResult r = run_ma_audit(cfg);
    REQUIRE(r.rows.size() == 4);  // two T values x two resolutions
    CHECK_FALSE(r.monte_carlo);
    // T = 1.0 < lifespan: tiny mass; T = 3.0: singular share dominates
    const MAAuditRow& smooth = r.rows[1];
    CHECK(smooth.T == 1.0);
    CHECK(smooth.total_mass <= 0.2);
    const MAAuditRow& kinked = r.rows[3];
    CHECK(kinked.T == 3.0);
    CHECK(kinked.singular_share >= 0.5);
    CHECK(file_exists(out + "/ma_summary.csv"));
    CHECK(file_exists(out + "/ma_T3_R64.csv"));
}

TEST_CASE("cli subcommands and exit codes") {
    std::string out = tmp_dir("cli");
    std::string cfg_path = out + "/c.cfg";
    write_text_file(cfg_path,
                    "[problem]\npolytope = segment\nvelocity = bump\n"
                    "[study]\nn_ladder = 2,4,8\nt_max = 0.5\ns_step = 0.25\nx_window = "
                    "2.0\nx_step = 1.0\n[output]\ndir = " + out + "/run\n");

    const char* argv_ok[] = {"hrma_lab", "converge", "--config", cfg_path.c_str(),
                             "--threads", "2"};
    CHECK(cli_main(6, argv_ok) == 0);
    CHECK(file_exists(out + "/run/summary.csv"));

    const char* argv_bad[] = {"hrma_lab", "converge", "--config", "/nonexistent.cfg"};
    CHECK(cli_main(4, argv_bad) == 1);

    // invalid ladder in the file -> config error
    std::string bad_path = out + "/bad.cfg";
    write_text_file(bad_path, "[problem]\npolytope = segment\nvelocity = bump\n"
                              "[study]\nn_ladder = 16,8\n");
    const char* argv_bad2[] = {"hrma_lab", "converge", "--config", bad_path.c_str()};
    CHECK(cli_main(4, argv_bad2) == 1);

    const char* argv_life[] = {"hrma_lab", "lifespan", "--config", cfg_path.c_str()};
    CHECK(cli_main(4, argv_life) == 0);

    // resolution overrides reach the audit
    const char* argv_ma[] = {"hrma_lab", "ma-audit",     "--config", cfg_path.c_str(),
                             "--resolutions", "8,16", "--t-values", "0.5"};
    CHECK(cli_main(8, argv_ma) == 0);

    const char* argv_cache[] = {"hrma_lab", "spectral-cache", "--config", cfg_path.c_str()};
    CHECK(cli_main(4, argv_cache) == 0);
}

TEST_CASE("unwritable output directory exits with the I/O code") {
    std::string out = tmp_dir("io_err");
    std::string cfg_path = out + "/c.cfg";
    write_text_file(out + "/blocker", "");
    write_text_file(cfg_path,
                    "[problem]\npolytope = segment\nvelocity = bump\n"
                    "[study]\nn_ladder = 2,4,8\nt_max = 0.5\ns_step = 0.25\nx_window = "
                    "2.0\nx_step = 1.0\n[output]\ndir = " + out + "/blocker/run\n");
    const char* argv[] = {"hrma_lab", "converge", "--config", cfg_path.c_str()};
    CHECK(cli_main(4, argv) == 2);
}

TEST_CASE("plot emission and the numerical-failure exit code") {
    std::string out = tmp_dir("plots");
    StudyConfig cfg = small_flagship(out);
    cfg.plots = true;
    run_convergence_study(cfg);
    CHECK(file_exists(out + "/sup_error.svg"));

    // an unreachable quadrature tolerance exhausts the panel budget; the CLI
    // maps it to exit code 3 and leaves a diagnostics file behind
    std::string out2 = tmp_dir("numfail");
    std::string cfg_path = out2 + "/c.cfg";
    write_text_file(cfg_path,
                    "[problem]\npolytope = segment\nvelocity = bump\n"
                    "[study]\nn_ladder = 2,4,8\nt_max = 0.5\ns_step = 0.25\nx_window = "
                    "2.0\nx_step = 1.0\n[numerics]\nquad_rel_tol = 1e-300\n"
                    "[output]\ndir = " + out2 + "/run\n");
    const char* argv[] = {"hrma_lab", "converge", "--config", cfg_path.c_str()};
    CHECK(cli_main(4, argv) == 3);
    CHECK(file_exists(out2 + "/run/diagnostics.txt"));
}

TEST_CASE("ma audit falls back to Monte Carlo above one dimension") {
    std::string out = tmp_dir("ma_mc");
    StudyConfig cfg = parse_config_text(
        "[problem]\npolytope = square\nvelocity = monomials:[[1,1,1]]\n"
        "[ma]\nresolutions = 8\nt_values = 0.4\nmc_samples = 20000\n"
        "[numerics]\nlegendre_coarse = 48\n"
        "[study]\nx_window = 5.0\n",
        "inline");
    cfg.out_dir = out;
    MAAuditResult r = run_ma_audit(cfg);
    CHECK(r.monte_carlo);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].total_mass >= 0.0);
    CHECK(r.rows[0].mc_ci > 0.0);
    CHECK(file_exists(out + "/ma_summary.csv"));
}

TEST_CASE("two-dimensional convergence study end to end") {
    std::string out = tmp_dir("conv2d");
    StudyConfig cfg = parse_config_text(
        "[problem]\npolytope = simplex2\nvelocity = monomials:[[1,1,0],[-1,2,0]]\n"
        "[study]\nn_ladder = 2,4,8\nt_max = 0.5\ns_step = 0.25\nx_window = 2.0\nx_step = 1.0\n"
        "[numerics]\nlegendre_coarse = 64\n",
        "inline");
    cfg.out_dir = out;
    ConvergenceResult r = run_convergence_study(cfg);
    REQUIRE(r.sup_errors.size() == 3);
    CHECK(r.sup_errors[2] < r.sup_errors[0]);
    for (double e : r.sup_errors) CHECK(std::isfinite(e));
    CHECK(file_exists(out + "/convergence_N8.csv"));
}
