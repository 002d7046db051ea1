#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dnl/audit.hpp"
#include "dnl/config.hpp"
#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/io.hpp"
#include "dnl/nonlinearity.hpp"
#include "dnl/resolvent.hpp"
#include "dnl/semigroup.hpp"

namespace dnl {

// ---------------------------------------------------------------------------
// Default test profiles on the normalized node coordinate x = i / (N - 1).
// The sawtooth is genuinely sign-changing, which is what exercises the
// sandwich/lattice machinery; the step is discontinuous.

inline NodeFunction make_profile(const DiscreteDomain& dom, const std::string& name) {
    const int n = dom.node_count();
    NodeFunction f(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (dom.is_boundary(i)) continue;
        const double x = static_cast<double>(i) / (n - 1);
        if (name == "bump") {
            f[i] = std::exp(-50.0 * (x - 0.5) * (x - 0.5));
        } else if (name == "step") {
            f[i] = x < 0.5 ? 1.0 : 0.0;
        } else if (name == "sawtooth") {
            const double t = 3.0 * x;
            f[i] = 2.0 * (t - std::floor(t)) - 1.0;
        } else {
            throw std::invalid_argument("unknown profile '" + name + "'");
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Density sweep: resolvent solves along a decreasing lambda list, warm
// started by continuation (u_lambda -> f makes adjacent solutions close).

struct DensityRow {
    double lambda = 0.0;
    double err_l1 = 0.0;    // ||u_lambda - f||_1 at the configured nu
    double err_linf = 0.0;
    double u_linf = 0.0;
    double key_margin = 0.0;
    int iterations = 0;
    double err_l1_nu0 = 0.0;  // nu = 0 comparison column
    bool failed = false;
    bool flagged_nonmonotone = false;  // err_l1 rose beyond slack vs previous row
    std::string error;
};

struct DensityTable {
    std::vector<DensityRow> rows;

    CsvTable to_csv() const {
        CsvTable t;
        t.columns = {"lambda", "err_l1", "err_linf", "u_linf", "key_margin",
                     "iterations", "err_l1_nu0", "failed", "flagged"};
        for (const auto& r : rows)
            t.rows.push_back({r.lambda, r.err_l1, r.err_linf, r.u_linf, r.key_margin,
                              static_cast<double>(r.iterations), r.err_l1_nu0, r.failed ? 1.0 : 0.0,
                              r.flagged_nonmonotone ? 1.0 : 0.0});
        return t;
    }
};

inline void validate_lambda_list(const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("lambda list must not be empty");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0)) throw std::invalid_argument("lambda list must be positive");
        if (k > 0 && !(lambdas[k] < lambdas[k - 1]))
            throw std::invalid_argument("lambda list must be strictly decreasing");
    }
}

inline std::vector<double> default_lambda_list() {
    std::vector<double> l;
    for (int k = 0; k <= 12; ++k) l.push_back(std::pow(2.0, -k));
    return l;
}

inline DensityTable density_sweep(const Energy& E, const Nonlinearity& phi, const NodeFunction& f,
                                  const std::vector<double>& lambdas, double nu,
                                  const SolveOptions& base_opts = {}) {
    validate_lambda_list(lambdas);
    const auto& dom = E.domain();
    DensityTable table;
    SolveOptions opts = base_opts;       // warm-start chain at the given nu
    SolveOptions opts_nu0 = base_opts;   // independent chain for the nu = 0 column
    double prev_err = std::numeric_limits<double>::infinity();

    for (double lambda : lambdas) {
        DensityRow row;
        row.lambda = lambda;
        try {
            const ResolventProblem prob(E, phi, lambda, nu, f);
            const auto sol = solve(prob, opts);
            NodeFunction diff(f.size());
            for (std::size_t i = 0; i < f.size(); ++i) diff[i] = sol.u[i] - f[i];
            row.err_l1 = norm(dom, diff, Norm::L1);
            row.err_linf = norm(dom, diff, Norm::Linf);
            row.u_linf = norm(dom, sol.u, Norm::Linf);
            row.key_margin = key_inequality_margin(prob, sol);
            row.iterations = sol.iterations;
            opts.initial_w = sol.w;

            const auto sol0 = solve(ResolventProblem(E, phi, lambda, 0.0, f), opts_nu0);
            for (std::size_t i = 0; i < f.size(); ++i) diff[i] = sol0.u[i] - f[i];
            row.err_l1_nu0 = norm(dom, diff, Norm::L1);
            opts_nu0.initial_w = sol0.w;

            if (row.err_l1 > prev_err + 1e-8) row.flagged_nonmonotone = true;
            prev_err = row.err_l1;
        } catch (const SolverError& err) {
            row.failed = true;
            row.error = err.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ||f_lambda||_1 along the sweep, f_lambda = (f - u_lambda)(phi(f) - phi(u_lambda)).
struct FlambdaRow {
    double lambda = 0.0;
    double flambda_l1 = 0.0;
    bool failed = false;
    std::string error;
};

struct FlambdaTable {
    std::vector<FlambdaRow> rows;

    CsvTable to_csv() const {
        CsvTable t;
        t.columns = {"lambda", "flambda_l1", "failed"};
        for (const auto& r : rows) t.rows.push_back({r.lambda, r.flambda_l1, r.failed ? 1.0 : 0.0});
        return t;
    }
};

inline FlambdaTable flambda_convergence(const Energy& E, const Nonlinearity& phi, const NodeFunction& f,
                                        const std::vector<double>& lambdas, double nu = 1e-3,
                                        const SolveOptions& base_opts = {}) {
    validate_lambda_list(lambdas);
    const auto& dom = E.domain();
    FlambdaTable table;
    SolveOptions opts = base_opts;
    for (double lambda : lambdas) {
        FlambdaRow row;
        row.lambda = lambda;
        try {
            const ResolventProblem prob(E, phi, lambda, nu, f);
            const auto sol = solve(prob, opts);
            row.flambda_l1 = norm(dom, pointwise_product_flambda(f, sol, phi), Norm::L1);
            opts.initial_w = sol.w;
        } catch (const SolverError& err) {
            row.failed = true;
            row.error = err.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Scripted experiment suite: density sweeps over a (p, m) matrix, the full
// hypothesis audit, and one evolution run, bundled into an output directory
// with a manifest (config hash + seed, no timestamps, so reruns are
// byte-identical).

struct SuiteConfig {
    std::uint64_t seed = 42;
    DomainConfig domain{"grid1d", 64, 8, 8, 1.0, ""};
    std::vector<double> ps = {1.5, 2.0, 3.0};
    std::vector<double> ms = {0.5, 1.0, 2.0, 3.0};
    std::vector<std::string> profiles = {"bump", "step", "sawtooth"};
    std::vector<double> lambdas = default_lambda_list();
    double nu = 1e-3;
    double solver_tol = 1e-10;
    AuditConfig audit;
    EnergyConfig evolution_energy{"p_dirichlet", 3.0, -1.0, ""};
    PhiConfig evolution_phi{"power", 2.0, {}, {}};
    int evolution_grid_n = 32;
    double evolution_t = 1.0;
    int evolution_steps = 128;
};

inline void from_json(const nlohmann::json& j, SuiteConfig& c) {
    c.seed = j.value("seed", std::uint64_t{42});
    if (j.contains("domain")) j.at("domain").get_to(c.domain);
    c.ps = j.value("ps", std::vector<double>{1.5, 2.0, 3.0});
    c.ms = j.value("ms", std::vector<double>{0.5, 1.0, 2.0, 3.0});
    c.profiles = j.value("profiles", std::vector<std::string>{"bump", "step", "sawtooth"});
    c.lambdas = j.value("lambdas", default_lambda_list());
    c.nu = j.value("nu", 1e-3);
    c.solver_tol = j.value("solver_tol", 1e-10);
    if (j.contains("audit")) j.at("audit").get_to(c.audit);
    if (j.contains("evolution_energy")) j.at("evolution_energy").get_to(c.evolution_energy);
    if (j.contains("evolution_phi")) j.at("evolution_phi").get_to(c.evolution_phi);
    c.evolution_grid_n = j.value("evolution_grid_n", 32);
    c.evolution_t = j.value("evolution_t", 1.0);
    c.evolution_steps = j.value("evolution_steps", 128);
}

inline void to_json(nlohmann::json& j, const SuiteConfig& c) {
    j = nlohmann::json{{"seed", c.seed},
                       {"domain", c.domain},
                       {"ps", c.ps},
                       {"ms", c.ms},
                       {"profiles", c.profiles},
                       {"lambdas", c.lambdas},
                       {"nu", c.nu},
                       {"solver_tol", c.solver_tol},
                       {"audit", c.audit},
                       {"evolution_energy", c.evolution_energy},
                       {"evolution_phi", c.evolution_phi},
                       {"evolution_grid_n", c.evolution_grid_n},
                       {"evolution_t", c.evolution_t},
                       {"evolution_steps", c.evolution_steps}};
}

struct SuiteResult {
    bool all_passed = true;
    std::vector<std::string> files;
    std::vector<std::string> failures;
    std::filesystem::path manifest_path;
};

inline std::string cell_tag(double p, double m, const std::string& profile) {
    auto short_num = [](double v) {
        std::string s = fmt_g17(v);
        return s;
    };
    return "p" + short_num(p) + "_m" + short_num(m) + "_" + profile;
}

inline SuiteResult run_experiment_suite(const SuiteConfig& cfg, const std::filesystem::path& out_dir) {
    validate_lambda_list(cfg.lambdas);
    std::filesystem::create_directories(out_dir);

    SuiteResult result;
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["seed"] = cfg.seed;
    {
        nlohmann::json cfg_json = cfg;
        manifest["config"] = cfg_json;
        manifest["config_hash"] = hex64(fnv1a(cfg_json.dump()));
    }
    auto& experiments = manifest["experiments"] = nlohmann::json::array();

    const DiscreteDomain dom = build_domain(cfg.domain);
    SolveOptions opts;
    opts.tol = cfg.solver_tol;

    for (double p : cfg.ps) {
        for (double m : cfg.ms) {
            EnergyConfig ec{"p_dirichlet", p, -1.0, ""};
            const auto energy = build_energy(ec, dom);
            const Nonlinearity phi = m == 1.0 ? Nonlinearity::identity() : Nonlinearity::power(m);
            for (const auto& profile : cfg.profiles) {
                const std::string tag = cell_tag(p, m, profile);
                bool ok = true;
                try {
                    const NodeFunction f = make_profile(dom, profile);

                    const DensityTable density = density_sweep(*energy, phi, f, cfg.lambdas, cfg.nu, opts);
                    const std::string density_file = "density_" + tag + ".csv";
                    density.to_csv().write(out_dir / density_file);
                    result.files.push_back(density_file);

                    const FlambdaTable fl = flambda_convergence(*energy, phi, f, cfg.lambdas, cfg.nu, opts);
                    const std::string fl_file = "flambda_" + tag + ".csv";
                    fl.to_csv().write(out_dir / fl_file);
                    result.files.push_back(fl_file);

                    for (const auto& row : density.rows) {
                        if (row.failed) {
                            result.failures.push_back(density_file + ": solver failure at lambda=" +
                                                      fmt_g17(row.lambda));
                            ok = false;
                        }
                        if (row.flagged_nonmonotone) {
                            result.failures.push_back(density_file + ": nonmonotone err_l1 at lambda=" +
                                                      fmt_g17(row.lambda));
                            ok = false;
                        }
                    }
                    for (const auto& row : fl.rows)
                        if (row.failed) {
                            result.failures.push_back(fl_file + ": solver failure at lambda=" +
                                                      fmt_g17(row.lambda));
                            ok = false;
                        }
                } catch (const std::exception& e) {
                    result.failures.push_back("density_" + tag + ": " + e.what());
                    ok = false;
                }
                experiments.push_back({{"name", "density_" + tag}, {"ok", ok}});
            }
        }
    }

    try {
        AuditConfig audit_cfg = cfg.audit;
        const AuditReport report = run_full_audit(audit_cfg);
        write_json_file(out_dir / "audit_report.json", report.to_json());
        result.files.push_back("audit_report.json");
        if (!report.all_passed()) {
            for (const auto& c : report.checks)
                if (!c.pass) result.failures.push_back("audit_report.json: " + c.name + " failed");
        }
        experiments.push_back({{"name", "audit"}, {"ok", report.all_passed()}});
    } catch (const std::exception& e) {
        result.failures.push_back(std::string("audit: ") + e.what());
        experiments.push_back({{"name", "audit"}, {"ok", false}});
    }

    try {
        const DiscreteDomain evo_dom = build_path_grid(cfg.evolution_grid_n, 1.0);
        const auto energy = build_energy(cfg.evolution_energy, evo_dom);
        const Nonlinearity phi = build_phi(cfg.evolution_phi);
        const NodeFunction u0 = make_profile(evo_dom, "bump");
        const EvolutionRun run = evolve(*energy, phi, u0, cfg.evolution_t, cfg.evolution_steps, opts);
        trajectory_csv(evo_dom, run).write(out_dir / "evolution.csv");
        result.files.push_back("evolution.csv");

        bool linf_monotone = true;
        double prev = norm(evo_dom, run.trajectory.front(), Norm::Linf);
        for (std::size_t k = 1; k < run.trajectory.size(); ++k) {
            const double cur = norm(evo_dom, run.trajectory[k], Norm::Linf);
            if (cur > prev + 1e-10) linf_monotone = false;
            prev = cur;
        }
        if (!linf_monotone) result.failures.push_back("evolution.csv: ||u||_inf not nonincreasing");
        experiments.push_back({{"name", "evolution"}, {"ok", linf_monotone}});
    } catch (const std::exception& e) {
        result.failures.push_back(std::string("evolution: ") + e.what());
        experiments.push_back({{"name", "evolution"}, {"ok", false}});
    }

    result.all_passed = result.failures.empty();
    manifest["failures"] = result.failures;
    manifest["files"] = result.files;
    manifest["all_passed"] = result.all_passed;
    result.manifest_path = out_dir / "manifest.json";
    write_json_file(result.manifest_path, manifest);
    return result;
}

}  // namespace dnl
