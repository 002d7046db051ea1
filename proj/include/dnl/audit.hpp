#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dnl/config.hpp"
#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/nonlinearity.hpp"
#include "dnl/random.hpp"
#include "dnl/report.hpp"
#include "dnl/resolvent.hpp"

namespace dnl {

// ---------------------------------------------------------------------------
// Adversarial energies for mutation-style meta-tests of the audit harness.
// They deliberately violate individual hypotheses; the planted-defect configs
// below assert that the audit catches each one.

// E(u) = base(u) + <b, u>_mu: convex, but the zero-in-graph condition fails
// (gradient b at the origin) and with it the sign conditions on the Yosida
// path.
class TiltedEnergy final : public Energy {
public:
    TiltedEnergy(std::unique_ptr<Energy> base, NodeFunction tilt)
        : Energy(base->domain(), base->eps_reg()), base_(std::move(base)), tilt_(std::move(tilt)) {
        dom_.check_size(tilt_);
    }

    std::string kind() const override { return "tilted(" + base_->kind() + ")"; }

    void add_gradient_raw(const NodeFunction& u, NodeFunction& g) const override {
        base_->add_gradient_raw(u, g);
        for (int i : dom_.free_nodes()) g[i] += dom_.measure()[i] * tilt_[i];
    }

    void add_hessian_raw(const NodeFunction& u, std::vector<Triplet>& h) const override {
        base_->add_hessian_raw(u, h);
    }

private:
    double value_impl(const NodeFunction& u) const override {
        return base_->value(u) + inner_product(dom_, tilt_, u);
    }

    std::unique_ptr<Energy> base_;
    NodeFunction tilt_;
};

// E(u) = -||u||^2_mu: concave, so the minimum-at-zero, accretivity and
// truncation inequalities all break while the gradient at zero stays 0.
class NegatedL2Energy final : public Energy {
public:
    explicit NegatedL2Energy(DiscreteDomain dom) : Energy(std::move(dom), 0.0) {}

    std::string kind() const override { return "negated_l2"; }

    void add_gradient_raw(const NodeFunction& u, NodeFunction& g) const override {
        for (int i : dom_.free_nodes()) g[i] += -2.0 * dom_.measure()[i] * u[i];
    }

    void add_hessian_raw(const NodeFunction&, std::vector<Triplet>& h) const override {
        for (int i : dom_.free_nodes()) h.push_back({i, i, -2.0 * dom_.measure()[i]});
    }

private:
    double value_impl(const NodeFunction& u) const override { return -inner_product(dom_, u, u); }
};

// Non-monotone flux a(xi) = -xi with potential -xi^2/2: breaks coercivity,
// monotonicity, and every consequence of convexity downstream.
inline LerayLionsSpec broken_monotone_flux() {
    LerayLionsSpec s;
    s.p = 2.0;
    s.flux = [](double, double xi) { return -xi; };
    s.potential = [](double, double xi) { return -0.5 * xi * xi; };
    s.flux_dxi = [](double, double) { return -1.0; };
    s.a0 = [](double) { return 1.0; };
    s.a1 = [](double) { return 0.0; };
    s.a2 = [](double) { return 0.0; };
    s.eta = 1.0;
    return s;
}

// ---------------------------------------------------------------------------
// Sampling helpers. All randomness is drawn from substreams of one seed so
// every audit is deterministic given (seed, config).

namespace detail {

inline NodeFunction random_node_function(const DiscreteDomain& dom, SplitMix64& rng, double amplitude) {
    NodeFunction u(dom.node_count(), 0.0);
    for (int i : dom.free_nodes()) u[i] = rng.uniform(-amplitude, amplitude);
    return u;
}

inline NodeFunction constant_free(const DiscreteDomain& dom, double c) {
    NodeFunction u(dom.node_count(), 0.0);
    for (int i : dom.free_nodes()) u[i] = c;
    return u;
}

// Deterministic sign probes +-c*1: zeroth-order defects (a tilted gradient,
// a flipped operator sign) show up on constant-sign data with certainty,
// whereas rough random samples can mask them behind large energy terms.
inline std::vector<NodeFunction> sign_probes(const DiscreteDomain& dom) {
    std::vector<NodeFunction> probes;
    for (double c : {0.01, 0.1, 1.0}) {
        probes.push_back(constant_free(dom, c));
        probes.push_back(constant_free(dom, -c));
    }
    return probes;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hypothesis audits. Each returns Check entries whose pass flag is exactly
// worst_margin >= -tolerance for that check's own tolerance.

// Zero in the graph: subgradient(E, 0) = 0 to 1e-12 and E(0) <= E(u) + 1e-10
// over random u plus the sign probes.
inline std::vector<Check> audit_H1(const Energy& E, int trials, std::uint64_t seed) {
    const auto& dom = E.domain();
    Check grad = Check::make("h1_zero_subgradient", 1e-12);
    Check minimum = Check::make("h1_zero_minimum", 1e-10);

    const NodeFunction zero = dom.zero();
    grad.record(-norm(dom, E.subgradient(zero), Norm::L2), {{"u", "0"}});

    const double e0 = E.value(zero);
    SplitMix64 rng(SplitMix64::substream(seed, 1));
    for (const auto& probe : detail::sign_probes(dom))
        minimum.record(E.value(probe) - e0, {{"u", probe}});
    for (int t = 0; t < trials; ++t) {
        const NodeFunction u = detail::random_node_function(dom, rng, 2.0);
        minimum.record(E.value(u) - e0, {{"u", u}});
    }
    return {grad, minimum};
}

// Complete accretivity: int j(u - uhat) <= int j(u - uhat + lambda (v - vhat))
// over sampled (pair, j, lambda) triples with v = subgradient(E, u). The
// increment is lambda (v - vhat), the standard difference form.
inline Check audit_H2(const Energy& E, int pair_count, const std::vector<TestFunctionJ0>& j_family,
                      const std::vector<double>& lambda_grid, std::uint64_t seed, double tol) {
    const auto& dom = E.domain();
    Check check = Check::make("h2_complete_accretivity", tol);
    SplitMix64 rng(SplitMix64::substream(seed, 2));
    NodeFunction diff(dom.node_count()), shifted(dom.node_count());
    for (int t = 0; t < pair_count; ++t) {
        const NodeFunction u = detail::random_node_function(dom, rng, 2.0);
        const NodeFunction uh = detail::random_node_function(dom, rng, 2.0);
        const NodeFunction v = E.subgradient(u);
        const NodeFunction vh = E.subgradient(uh);
        const auto& j = j_family[t % j_family.size()];
        const double lambda = lambda_grid[t % lambda_grid.size()];
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < dom.node_count(); ++i) {
            const double d = u[i] - uh[i];
            lhs += dom.measure()[i] * j(d);
            rhs += dom.measure()[i] * j(d + lambda * (v[i] - vh[i]));
        }
        check.record(rhs - lhs, {{"trial", t}, {"j", j.name()}, {"lambda", lambda}, {"u", u}, {"uhat", uh}});
    }
    return check;
}

inline Check audit_H2star(const Energy& E, int trial_count, const std::vector<TruncationP0>& t_family,
                          std::uint64_t seed, double tol) {
    const auto& dom = E.domain();
    Check check = Check::make("h2star_truncation_inequality", tol);
    SplitMix64 rng(SplitMix64::substream(seed, 3));
    for (int t = 0; t < trial_count; ++t) {
        const NodeFunction u = detail::random_node_function(dom, rng, 2.0);
        const NodeFunction uh = detail::random_node_function(dom, rng, 2.0);
        const auto& T = t_family[t % t_family.size()];
        const auto result = check_H2star(E, u, uh, T, tol);
        check.record(result.margin, {{"trial", t}, {"T", T.name()}, {"u", u}, {"uhat", uh}});
    }
    return check;
}

// Sign conditions on the Yosida path: with v = subgradient(E, u) and
// y = [phi^{-1}]_lambda(u), the integrals int v y, int v sign0(y), and
// int v gamma_eps(y) must all be nonnegative. u ranges over sign probes,
// random vectors, and phi images of random vectors.
inline std::vector<Check> audit_H3(const Energy& E, const Nonlinearity& phi,
                                   const std::vector<double>& lambda_grid, int trial_count, std::uint64_t seed,
                                   double tol) {
    const auto& dom = E.domain();
    Check yosida = Check::make("h3_yosida_integral", tol);
    Check sign = Check::make("h3_sign_integral", tol);
    Check gamma = Check::make("h3_gamma_eps_path", tol);
    const double eps_grid[] = {1e-1, 1e-2, 1e-3, 1e-4};

    std::vector<NodeFunction> samples = detail::sign_probes(dom);
    SplitMix64 rng(SplitMix64::substream(seed, 4));
    for (int t = 0; t < trial_count; ++t) {
        NodeFunction u = detail::random_node_function(dom, rng, 2.0);
        if (t % 2 == 1)
            for (double& x : u) x = phi(x);
        samples.push_back(std::move(u));
    }

    NodeFunction y(dom.node_count());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const NodeFunction& u = samples[s];
        const NodeFunction v = E.subgradient(u);
        for (double lambda : lambda_grid) {
            for (int i = 0; i < dom.node_count(); ++i) y[i] = phi.yosida(lambda, u[i]);
            double int_y = 0.0, int_sign = 0.0;
            for (int i = 0; i < dom.node_count(); ++i) {
                int_y += dom.measure()[i] * v[i] * y[i];
                int_sign += dom.measure()[i] * v[i] * sign0(y[i]);
            }
            const nlohmann::json witness = {{"sample", s}, {"lambda", lambda}, {"u", u}};
            yosida.record(int_y, witness);
            sign.record(int_sign, witness);
            for (double eps : eps_grid) {
                double int_gamma = 0.0;
                for (int i = 0; i < dom.node_count(); ++i)
                    int_gamma += dom.measure()[i] * v[i] * gamma_eps(eps, y[i]);
                gamma.record(int_gamma, {{"sample", s}, {"lambda", lambda}, {"eps", eps}, {"u", u}});
            }
        }
    }
    return {yosida, sign, gamma};
}

// Lattice property. In finite dimensions every pinned vector has finite
// energy, so the check verifies the pointwise identities
// phi(u+) = [phi(u)]+, phi(u-) = [phi(u)]- and the finiteness of
// E(phi(u+)), E(phi(u-)).
inline std::vector<Check> audit_H4(const Energy& E, const Nonlinearity& phi, int trial_count,
                                   std::uint64_t seed) {
    const auto& dom = E.domain();
    Check identity = Check::make("h4_lattice_identity", 0.0);
    Check finite = Check::make("h4_domain_finiteness", 0.0);
    SplitMix64 rng(SplitMix64::substream(seed, 5));
    for (int t = 0; t < trial_count; ++t) {
        const NodeFunction u = detail::random_node_function(dom, rng, 2.0);
        double worst = 0.0;
        for (double r : u) {
            const double fr = phi(r);
            worst = std::max(worst, std::abs(phi(std::max(r, 0.0)) - std::max(fr, 0.0)));
            worst = std::max(worst, std::abs(phi(std::min(r, 0.0)) - std::min(fr, 0.0)));
        }
        identity.record(-worst, {{"trial", t}, {"u", u}});

        NodeFunction phi_pos(u.size()), phi_neg(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            phi_pos[i] = phi(std::max(u[i], 0.0));
            phi_neg[i] = phi(std::min(u[i], 0.0));
        }
        const bool ok = std::isfinite(E.value(phi_pos)) && std::isfinite(E.value(phi_neg));
        finite.record(ok ? 0.0 : -1.0, {{"trial", t}, {"u", u}});
    }
    return {identity, finite};
}

// Solves the resolvent problem for f, f+ and f- and checks the ordering
// u_- <= u <= u_+ together with sign preservation u_+ >= 0, u_- <= 0.
inline Check audit_sandwich(const Energy& E, const Nonlinearity& phi, double nu, const NodeFunction& f,
                            const std::vector<double>& lambda_grid, double tol,
                            const SolveOptions& opts = {}) {
    const auto& dom = E.domain();
    Check check = Check::make("sandwich", tol);
    for (double lambda : lambda_grid) {
        const auto sol = solve(ResolventProblem(E, phi, lambda, nu, f), opts);
        const auto sol_pos = solve(ResolventProblem(E, phi, lambda, nu, positive_part(f)), opts);
        const auto sol_neg = solve(ResolventProblem(E, phi, lambda, nu, negative_part(f)), opts);
        double margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dom.node_count(); ++i) {
            margin = std::min(margin, sol.u[i] - sol_neg.u[i]);
            margin = std::min(margin, sol_pos.u[i] - sol.u[i]);
            margin = std::min(margin, sol_pos.u[i]);
            margin = std::min(margin, -sol_neg.u[i]);
        }
        check.record(margin, {{"lambda", lambda}, {"f", f}});
    }
    return check;
}

// ---------------------------------------------------------------------------
// Full audit.

struct AuditConfig {
    DomainConfig domain{"grid1d", 16, 8, 8, 1.0, ""};
    EnergyConfig energy{"p_dirichlet", 2.0, -1.0, ""};
    PhiConfig phi{"identity", 1.0, {}, {}};
    std::uint64_t seed = 42;
    int trials = 200;
    int h1_trials = 1000;
    std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0};
    double tolerance = 1e-8;
    int j0_count = 8;
    int p0_count = 8;
    // none | tilted_gradient | nonconvex_energy | nonmonotone_flux
    std::string planted_defect = "none";
    // The sandwich audit runs resolvent solves, which require a convex
    // energy; planted-defect runs disable it.
    bool include_solver_checks = true;
    int sandwich_count = 5;
    double sandwich_nu = 1e-3;
    double solver_tol = 1e-10;
};

inline void from_json(const nlohmann::json& j, AuditConfig& c) {
    if (j.contains("domain")) j.at("domain").get_to(c.domain);
    if (j.contains("energy")) j.at("energy").get_to(c.energy);
    if (j.contains("phi")) j.at("phi").get_to(c.phi);
    c.seed = j.value("seed", std::uint64_t{42});
    c.trials = j.value("trials", 200);
    c.h1_trials = j.value("h1_trials", 1000);
    c.lambda_grid = j.value("lambda_grid", std::vector<double>{1e-3, 1e-2, 1e-1, 1.0});
    c.tolerance = j.value("tolerance", 1e-8);
    c.j0_count = j.value("j0_count", 8);
    c.p0_count = j.value("p0_count", 8);
    c.planted_defect = j.value("planted_defect", std::string("none"));
    c.include_solver_checks = j.value("include_solver_checks", true);
    c.sandwich_count = j.value("sandwich_count", 5);
    c.sandwich_nu = j.value("sandwich_nu", 1e-3);
    c.solver_tol = j.value("solver_tol", 1e-10);
}

inline void to_json(nlohmann::json& j, const AuditConfig& c) {
    j = nlohmann::json{{"domain", c.domain},
                       {"energy", c.energy},
                       {"phi", c.phi},
                       {"seed", c.seed},
                       {"trials", c.trials},
                       {"h1_trials", c.h1_trials},
                       {"lambda_grid", c.lambda_grid},
                       {"tolerance", c.tolerance},
                       {"j0_count", c.j0_count},
                       {"p0_count", c.p0_count},
                       {"planted_defect", c.planted_defect},
                       {"include_solver_checks", c.include_solver_checks},
                       {"sandwich_count", c.sandwich_count},
                       {"sandwich_nu", c.sandwich_nu},
                       {"solver_tol", c.solver_tol}};
}

// Runs every hypothesis audit plus the structure checker. Deterministic
// given (seed, config); per-check errors are recorded, not thrown.
inline AuditReport run_full_audit(const AuditConfig& cfg) {
    DiscreteDomain dom = build_domain(cfg.domain);
    const Nonlinearity phi = build_phi(cfg.phi);

    std::unique_ptr<Energy> energy;
    LerayLionsSpec structure_spec = structure_spec_for(cfg.energy);
    double structure_x_hi = 1.0;
    bool solver_checks = cfg.include_solver_checks;

    if (cfg.planted_defect == "none") {
        energy = build_energy(cfg.energy, dom);
        if (auto* ll = dynamic_cast<const LerayLions1DEnergy*>(energy.get())) {
            structure_spec = ll->spec();
            structure_x_hi = ll->domain_length();
        }
    } else if (cfg.planted_defect == "tilted_gradient") {
        auto base = std::make_unique<GraphPDirichletEnergy>(dom, 2.0);
        energy = std::make_unique<TiltedEnergy>(std::move(base), detail::constant_free(dom, 0.5));
        solver_checks = false;
    } else if (cfg.planted_defect == "nonconvex_energy") {
        energy = std::make_unique<NegatedL2Energy>(dom);
        solver_checks = false;
    } else if (cfg.planted_defect == "nonmonotone_flux") {
        structure_spec = broken_monotone_flux();
        energy = std::make_unique<LerayLions1DEnergy>(dom, structure_spec);
        structure_x_hi = dom.grid_spacing() * (dom.node_count() - 1);
        solver_checks = false;
    } else {
        throw std::invalid_argument("audit: unknown planted defect '" + cfg.planted_defect + "'");
    }

    const auto j_family = sample_J0(cfg.seed, cfg.j0_count);
    const auto p_family = sample_P0(cfg.seed, cfg.p0_count);

    AuditReport rep;
    rep.header["config"] = cfg;
    rep.header["j0_family"] = [&] {
        std::vector<std::string> names;
        for (const auto& j : j_family) names.push_back(j.name());
        return names;
    }();
    rep.header["p0_family"] = [&] {
        std::vector<std::string> names;
        for (const auto& t : p_family) names.push_back(t.name());
        return names;
    }();
    rep.header["conventions"] = {
        {"accretivity_increment", "lambda * (v - vhat)"},
        {"flux_monotonicity_slots", "(a(x, xi1) - a(x, xi2)) * (xi1 - xi2)"},
    };

    for (auto& c : audit_H1(*energy, cfg.h1_trials, cfg.seed)) rep.checks.push_back(std::move(c));
    rep.checks.push_back(
        audit_H2(*energy, cfg.trials, j_family, cfg.lambda_grid, cfg.seed, cfg.tolerance));
    rep.checks.push_back(audit_H2star(*energy, cfg.trials, p_family, cfg.seed, cfg.tolerance));
    for (auto& c : audit_H3(*energy, phi, cfg.lambda_grid, cfg.trials, cfg.seed, cfg.tolerance))
        rep.checks.push_back(std::move(c));
    for (auto& c : audit_H4(*energy, phi, cfg.trials, cfg.seed)) rep.checks.push_back(std::move(c));

    StructureSampler sampler;
    sampler.seed = cfg.seed;
    sampler.count = cfg.trials;
    sampler.x_hi = structure_x_hi;
    for (auto& c : check_structure(structure_spec, sampler, cfg.tolerance).checks)
        rep.checks.push_back(std::move(c));

    if (solver_checks) {
        SplitMix64 rng(SplitMix64::substream(cfg.seed, 6));
        SolveOptions opts;
        opts.tol = cfg.solver_tol;
        Check sandwich = Check::make("sandwich", cfg.tolerance);
        for (int s = 0; s < cfg.sandwich_count; ++s) {
            const NodeFunction f = detail::random_node_function(dom, rng, 1.0);
            try {
                const Check one =
                    audit_sandwich(*energy, phi, cfg.sandwich_nu, f, cfg.lambda_grid, cfg.tolerance, opts);
                sandwich.record(one.worst_margin, one.witness);
            } catch (const SolverError& err) {
                sandwich.record(-std::numeric_limits<double>::infinity(),
                                {{"error", err.what()}, {"f", f}});
            }
        }
        rep.checks.push_back(std::move(sandwich));
    }

    return rep;
}

}  // namespace dnl
