#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dnl/dnl.hpp"

namespace fs = std::filesystem;
using namespace dnl;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("dnl_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DNL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli solve matches the library") {
    TempDir tmp;
    const auto dom = build_path_grid(8, 1.0);
    const NodeFunction f = make_profile(dom, "bump");
    write_json_file(tmp.path / "f.json", node_function_to_json(f));
    write_json_file(tmp.path / "c.json",
                    {{"domain", {{"kind", "grid1d"}, {"n", 8}, {"h", 1.0}}},
                     {"energy", {{"kind", "p_dirichlet"}, {"p", 3.0}}},
                     {"phi", {{"kind", "power"}, {"m", 2.0}}}});

    const int rc = run_cli("solve --config " + (tmp.path / "c.json").string() + " --lambda 0.01 --nu 0 --f " +
                           (tmp.path / "f.json").string() + " --out " + (tmp.path / "sol.json").string());
    REQUIRE(rc == 0);

    const auto sol_json = read_json_file(tmp.path / "sol.json");
    REQUIRE(sol_json.contains("u"));
    REQUIRE(sol_json.contains("w"));
    REQUIRE(sol_json.contains("residual"));
    REQUIRE(sol_json.contains("iterations"));

    GraphPDirichletEnergy E(dom, 3.0);
    const auto phi = Nonlinearity::power(2.0);
    const auto expected = solve(ResolventProblem(E, phi, 0.01, 0.0, f));
    const auto u = sol_json["u"].get<std::vector<double>>();
    REQUIRE(u.size() == expected.u.size());
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == Catch::Approx(expected.u[i]).margin(1e-9));
    CHECK(sol_json["residual"].get<double>() <= 1e-10);
}

TEST_CASE("cli solve accepts grid flags without a config") {
    TempDir tmp;
    const int rc =
        run_cli("solve --grid1d 4 --h 0.5 --lambda 0.1 --profile bump --out " + (tmp.path / "s.json").string());
    CHECK(rc == 0);
    const auto j = read_json_file(tmp.path / "s.json");
    CHECK(j["u"].get<std::vector<double>>().size() == 6);
}

TEST_CASE("cli audit exit codes reflect the report") {
    TempDir tmp;
    write_json_file(tmp.path / "audit.json", {{"trials", 40}, {"h1_trials", 50}, {"sandwich_count", 1}});
    const int ok = run_cli("audit --config " + (tmp.path / "audit.json").string() + " --seed 42 --out " +
                           (tmp.path / "report.json").string());
    CHECK(ok == 0);
    const auto report = read_json_file(tmp.path / "report.json");
    CHECK(report["all_passed"] == true);
    CHECK(report["schema_version"] == 1);

    write_json_file(tmp.path / "broken.json",
                    {{"trials", 40}, {"h1_trials", 50}, {"planted_defect", "nonconvex_energy"}});
    const int bad = run_cli("audit --config " + (tmp.path / "broken.json").string() + " --out " +
                            (tmp.path / "report2.json").string());
    CHECK(bad == 1);
    CHECK(read_json_file(tmp.path / "report2.json")["all_passed"] == false);
}

TEST_CASE("cli sweep writes a parseable table") {
    TempDir tmp;
    write_json_file(tmp.path / "c.json",
                    {{"domain", {{"kind", "grid1d"}, {"n", 16}, {"h", 1.0}}},
                     {"energy", {{"kind", "p_dirichlet"}, {"p", 2.0}}},
                     {"phi", {{"kind", "power"}, {"m", 2.0}}},
                     {"nu", 1e-3},
                     {"lambdas", {1.0, 0.5, 0.25, 0.125}}});
    const int rc = run_cli("sweep --config " + (tmp.path / "c.json").string() + " --profile step --out " +
                           (tmp.path / "sweep.csv").string());
    REQUIRE(rc == 0);
    std::ifstream in(tmp.path / "sweep.csv");
    const CsvTable t = CsvTable::parse(in);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.columns.front() == "lambda");
    CHECK(t.rows[0][0] == 1.0);
    // err_l1 decreasing down the sweep
    CHECK(t.rows[3][1] < t.rows[0][1]);
}

TEST_CASE("cli evolve emits the trajectory csv") {
    TempDir tmp;
    const int rc = run_cli("evolve --grid1d 8 --t 0.5 --steps 4 --profile bump --csv " +
                           (tmp.path / "traj.csv").string());
    REQUIRE(rc == 0);
    std::ifstream in(tmp.path / "traj.csv");
    const CsvTable t = CsvTable::parse(in);
    REQUIRE(t.rows.size() == 5);
    CHECK(t.columns == std::vector<std::string>{"step", "time", "l1", "l2", "linf", "mass"});
}

TEST_CASE("cli solve on a graph file domain") {
    TempDir tmp;
    const auto dom = build_path_grid(6, 0.25);
    write_json_file(tmp.path / "graph.json", domain_to_json(dom));
    write_json_file(tmp.path / "c.json",
                    {{"domain", {{"kind", "file"}, {"path", (tmp.path / "graph.json").string()}}},
                     {"energy", {{"kind", "p_dirichlet"}, {"p", 2.0}}},
                     {"phi", {{"kind", "identity"}}}});
    const int rc = run_cli("solve --config " + (tmp.path / "c.json").string() +
                           " --lambda 0.5 --profile bump --out " + (tmp.path / "sol.json").string());
    CHECK(rc == 0);
    CHECK(read_json_file(tmp.path / "sol.json")["u"].get<std::vector<double>>().size() == 8);
}

TEST_CASE("cli suite produces a bundle and exit code") {
    TempDir tmp;
    write_json_file(tmp.path / "suite.json",
                    {{"domain", {{"kind", "grid1d"}, {"n", 12}, {"h", 1.0}}},
                     {"ps", {2.0}},
                     {"ms", {2.0}},
                     {"profiles", {"bump"}},
                     {"lambdas", {1.0, 0.25}},
                     {"audit", {{"trials", 30}, {"h1_trials", 40}, {"sandwich_count", 1}}},
                     {"evolution_grid_n", 6},
                     {"evolution_steps", 4}});
    const int rc = run_cli("suite --config " + (tmp.path / "suite.json").string() + " --out-dir " +
                           (tmp.path / "bundle").string());
    CHECK(rc == 0);
    CHECK(fs::exists(tmp.path / "bundle" / "manifest.json"));
    CHECK(fs::exists(tmp.path / "bundle" / "audit_report.json"));
    CHECK(fs::exists(tmp.path / "bundle" / "evolution.csv"));
    const auto manifest = read_json_file(tmp.path / "bundle" / "manifest.json");
    CHECK(manifest["all_passed"] == true);
}

TEST_CASE("cli solve with a piecewise-linear nonlinearity table") {
    TempDir tmp;
    write_json_file(tmp.path / "c.json",
                    {{"domain", {{"kind", "grid1d"}, {"n", 8}, {"h", 1.0}}},
                     {"energy", {{"kind", "p_dirichlet"}, {"p", 2.0}}},
                     {"phi",
                      {{"kind", "piecewise_linear"},
                       {"breakpoints", {-1.0, 1.0}},
                       {"slopes", {0.5, 2.0, 0.5}}}}});
    const int rc = run_cli("solve --config " + (tmp.path / "c.json").string() +
                           " --lambda 0.2 --profile sawtooth --out " + (tmp.path / "sol.json").string());
    REQUIRE(rc == 0);

    const auto dom = build_path_grid(8, 1.0);
    GraphPDirichletEnergy E(dom, 2.0);
    const auto phi = Nonlinearity::piecewise_linear({-1.0, 1.0}, {0.5, 2.0, 0.5});
    const auto expected = solve(ResolventProblem(E, phi, 0.2, 0.0, make_profile(dom, "sawtooth")));
    const auto u = read_json_file(tmp.path / "sol.json")["u"].get<std::vector<double>>();
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == Catch::Approx(expected.u[i]).margin(1e-9));
}

TEST_CASE("cli suite isolates failing experiments") {
    TempDir tmp;
    write_json_file(tmp.path / "suite.json",
                    {{"domain", {{"kind", "grid1d"}, {"n", 8}, {"h", 1.0}}},
                     {"ps", {2.0}},
                     {"ms", {1.0}},
                     {"profiles", {"bump"}},
                     {"lambdas", {1.0, 0.5}},
                     {"audit",
                      {{"trials", 30}, {"h1_trials", 40}, {"planted_defect", "nonconvex_energy"}}},
                     {"evolution_grid_n", 6},
                     {"evolution_steps", 2}});
    const int rc = run_cli("suite --config " + (tmp.path / "suite.json").string() + " --out-dir " +
                           (tmp.path / "bundle").string());
    CHECK(rc == 1);  // audit fails, suite still completes
    const auto manifest = read_json_file(tmp.path / "bundle" / "manifest.json");
    CHECK(manifest["all_passed"] == false);
    CHECK(manifest["failures"].size() > 0);
    CHECK(fs::exists(tmp.path / "bundle" / "evolution.csv"));  // later experiments still ran
}

TEST_CASE("cli rejects malformed input") {
    TempDir tmp;
    CHECK(run_cli("solve --config /nonexistent.json") != 0);
    write_json_file(tmp.path / "bad.json", {{"energy", {{"kind", "warp_drive"}}}});
    CHECK(run_cli("solve --config " + (tmp.path / "bad.json").string()) != 0);
}
