// dnl: command-line front end.
//
//   dnl solve  --config c.json --lambda 0.01 --nu 0 --f f.json --out sol.json
//   dnl audit  --config c.json --seed 42 --out report.json
//   dnl evolve --config c.json --t 1.0 --steps 128 --u0 u0.json --out traj.json --csv traj.csv
//   dnl sweep  --config c.json --out table.csv
//   dnl suite  --config c.json --out-dir bundle/
//
// Exit code is nonzero iff a solve failed or any check failed.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnl/dnl.hpp"

namespace {

struct ProblemConfig {
    dnl::DomainConfig domain{"grid1d", 64, 8, 8, 1.0, ""};
    dnl::EnergyConfig energy{"p_dirichlet", 2.0, -1.0, ""};
    dnl::PhiConfig phi{"identity", 1.0, {}, {}};
    double nu = 0.0;
    std::vector<double> lambdas = dnl::default_lambda_list();
    double tol = 1e-10;
    std::string profile = "bump";
};

ProblemConfig load_problem_config(const std::string& path) {
    ProblemConfig cfg;
    if (path.empty()) return cfg;
    const nlohmann::json j = dnl::read_json_file(path);
    if (j.contains("domain")) j.at("domain").get_to(cfg.domain);
    if (j.contains("energy")) j.at("energy").get_to(cfg.energy);
    if (j.contains("phi")) j.at("phi").get_to(cfg.phi);
    cfg.nu = j.value("nu", 0.0);
    cfg.lambdas = j.value("lambdas", dnl::default_lambda_list());
    cfg.tol = j.value("tol", 1e-10);
    cfg.profile = j.value("profile", std::string("bump"));
    return cfg;
}

dnl::NodeFunction load_or_make_f(const std::string& path, const dnl::DiscreteDomain& dom,
                                 const std::string& profile) {
    if (!path.empty()) return dnl::node_function_from_json(dnl::read_json_file(path));
    return dnl::make_profile(dom, profile);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for doubly nonlinear diffusion operators"};
    app.require_subcommand(1);
    // --h is a documented grid flag, so help stays long-form only
    app.set_help_flag("--help", "print help");

    std::string config_path, f_path, u0_path, out_path, csv_path, out_dir = "bundle";
    std::string profile;
    std::optional<double> lambda_flag, nu_flag, tol_flag, h_flag;
    std::optional<int> grid1d_flag;
    std::optional<std::uint64_t> seed_flag;
    double t_final = 1.0;
    int steps = 128;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->set_help_flag("--help", "print help");
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--grid1d", grid1d_flag, "override: 1D grid interior node count");
        cmd->add_option("--h", h_flag, "override: grid spacing");
        cmd->add_option("--tol", tol_flag, "override: solver KKT tolerance");
    };

    auto* solve_cmd = app.add_subcommand("solve", "solve one resolvent problem");
    add_common(solve_cmd);
    solve_cmd->add_option("--lambda", lambda_flag, "resolvent parameter lambda");
    solve_cmd->add_option("--nu", nu_flag, "zeroth-order regularization nu");
    solve_cmd->add_option("--f", f_path, "right-hand side node function (JSON)");
    solve_cmd->add_option("--profile", profile, "built-in f profile if --f is absent");
    solve_cmd->add_option("--out", out_path, "solution JSON output");

    auto* audit_cmd = app.add_subcommand("audit", "run the hypothesis audit");
    audit_cmd->add_option("--config", config_path, "audit config JSON");
    audit_cmd->add_option("--seed", seed_flag, "override: audit seed");
    audit_cmd->add_option("--tol", tol_flag, "override: audit tolerance");
    audit_cmd->add_option("--out", out_path, "report JSON output");

    auto* evolve_cmd = app.add_subcommand("evolve", "implicit Euler evolution");
    add_common(evolve_cmd);
    evolve_cmd->add_option("--t", t_final, "final time");
    evolve_cmd->add_option("--steps", steps, "number of uniform steps");
    evolve_cmd->add_option("--u0", u0_path, "initial value node function (JSON)");
    evolve_cmd->add_option("--profile", profile, "built-in u0 profile if --u0 is absent");
    evolve_cmd->add_option("--out", out_path, "trajectory JSON output");
    evolve_cmd->add_option("--csv", csv_path, "trajectory CSV output (step,time,l1,l2,linf,mass)");

    auto* sweep_cmd = app.add_subcommand("sweep", "density sweep over the lambda list");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--nu", nu_flag, "zeroth-order regularization nu");
    sweep_cmd->add_option("--f", f_path, "right-hand side node function (JSON)");
    sweep_cmd->add_option("--profile", profile, "built-in f profile if --f is absent");
    sweep_cmd->add_option("--out", out_path, "sweep CSV output");

    auto* suite_cmd = app.add_subcommand("suite", "full experiment suite bundle");
    suite_cmd->add_option("--config", config_path, "suite config JSON");
    suite_cmd->add_option("--seed", seed_flag, "override: suite seed");
    suite_cmd->add_option("--tol", tol_flag, "override: solver KKT tolerance");
    suite_cmd->add_option("--out-dir", out_dir, "bundle output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed() || evolve_cmd->parsed() || sweep_cmd->parsed()) {
            ProblemConfig cfg = load_problem_config(config_path);
            if (grid1d_flag) {
                cfg.domain.kind = "grid1d";
                cfg.domain.n = *grid1d_flag;
            }
            if (h_flag) cfg.domain.h = *h_flag;
            if (nu_flag) cfg.nu = *nu_flag;
            if (tol_flag) cfg.tol = *tol_flag;
            if (!profile.empty()) cfg.profile = profile;

            const dnl::DiscreteDomain dom = dnl::build_domain(cfg.domain);
            const auto energy = dnl::build_energy(cfg.energy, dom);
            const dnl::Nonlinearity phi = dnl::build_phi(cfg.phi);
            dnl::SolveOptions opts;
            opts.tol = cfg.tol;

            if (solve_cmd->parsed()) {
                const double lambda = lambda_flag.value_or(cfg.lambdas.front());
                const dnl::NodeFunction f = load_or_make_f(f_path, dom, cfg.profile);
                const auto sol = dnl::solve(dnl::ResolventProblem(*energy, phi, lambda, cfg.nu, f), opts);
                const nlohmann::json out = dnl::solution_to_json(sol);
                if (out_path.empty())
                    std::cout << out.dump(2) << '\n';
                else
                    dnl::write_json_file(out_path, out);
                std::fprintf(stderr, "solved: residual %.3e, %d iterations\n", sol.kkt_residual,
                             sol.iterations);
                return 0;
            }

            if (evolve_cmd->parsed()) {
                const dnl::NodeFunction u0 = load_or_make_f(u0_path, dom, cfg.profile);
                const auto run = dnl::evolve(*energy, phi, u0, t_final, steps, opts);
                if (!out_path.empty()) {
                    nlohmann::json traj;
                    traj["t_final"] = run.t_final;
                    traj["n_steps"] = run.n_steps;
                    traj["trajectory"] = run.trajectory;
                    dnl::write_json_file(out_path, traj);
                }
                const dnl::CsvTable table = dnl::trajectory_csv(dom, run);
                if (!csv_path.empty())
                    table.write(csv_path);
                else if (out_path.empty())
                    std::cout << table.to_string();
                return 0;
            }

            // sweep
            const dnl::NodeFunction f = load_or_make_f(f_path, dom, cfg.profile);
            const dnl::DensityTable table = dnl::density_sweep(*energy, phi, f, cfg.lambdas, cfg.nu, opts);
            const dnl::CsvTable csv = table.to_csv();
            if (out_path.empty())
                std::cout << csv.to_string();
            else
                csv.write(out_path);
            for (const auto& row : table.rows)
                if (row.failed || row.flagged_nonmonotone) return 1;
            return 0;
        }

        if (audit_cmd->parsed()) {
            dnl::AuditConfig cfg;
            if (!config_path.empty()) dnl::read_json_file(config_path).get_to(cfg);
            if (seed_flag) cfg.seed = *seed_flag;
            if (tol_flag) cfg.tolerance = *tol_flag;
            const dnl::AuditReport report = dnl::run_full_audit(cfg);
            const nlohmann::json out = report.to_json();
            if (out_path.empty())
                std::cout << out.dump(2) << '\n';
            else
                dnl::write_json_file(out_path, out);
            for (const auto& c : report.checks)
                std::fprintf(stderr, "%-32s %s  worst margin % .3e\n", c.name.c_str(),
                             c.pass ? "pass" : "FAIL", c.worst_margin);
            return report.all_passed() ? 0 : 1;
        }

        // suite
        dnl::SuiteConfig cfg;
        if (!config_path.empty()) dnl::read_json_file(config_path).get_to(cfg);
        if (seed_flag) {
            cfg.seed = *seed_flag;
            cfg.audit.seed = *seed_flag;
        }
        if (tol_flag) {
            cfg.solver_tol = *tol_flag;
            cfg.audit.solver_tol = *tol_flag;
        }
        const dnl::SuiteResult result = dnl::run_experiment_suite(cfg, out_dir);
        std::fprintf(stderr, "suite: %zu files, %zu failures -> %s\n", result.files.size(),
                     result.failures.size(), result.manifest_path.c_str());
        for (const auto& f : result.failures) std::fprintf(stderr, "  failure: %s\n", f.c_str());
        return result.all_passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
