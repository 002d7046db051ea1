#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/io.hpp"
#include "dnl/nonlinearity.hpp"
#include "dnl/resolvent.hpp"

namespace dnl {

struct StepDiagnostics {
    int iterations = 0;
    double residual = 0.0;
};

struct EvolutionRun {
    NodeFunction u0;
    double t_final = 0.0;
    int n_steps = 0;
    std::vector<NodeFunction> trajectory;  // n_steps + 1 snapshots
    std::vector<StepDiagnostics> diagnostics;

    double tau() const { return t_final / n_steps; }
};

// One implicit Euler step of u' + dE(phi(u)) = 0: the resolvent problem with
// lambda = tau, f = u. nu = 0 here: in finite dimensions the objective stays
// strictly convex and coercive without the regularizer, and this is the
// semigroup of the unperturbed operator.
inline NodeFunction step(const Energy& E, const Nonlinearity& phi, const NodeFunction& u, double tau,
                         const SolveOptions& opts = {}) {
    if (!(tau > 0.0)) throw std::invalid_argument("step: tau must be positive");
    return solve(ResolventProblem(E, phi, tau, 0.0, u), opts).u;
}

// Exponential formula at fixed resolution: n_steps uniform implicit Euler
// steps, recording every snapshot.
inline EvolutionRun evolve(const Energy& E, const Nonlinearity& phi, const NodeFunction& u0, double t_final,
                           int n_steps, const SolveOptions& opts = {}) {
    if (n_steps < 1) throw std::invalid_argument("evolve: n_steps must be >= 1");
    if (!(t_final > 0.0)) throw std::invalid_argument("evolve: t_final must be positive");
    E.domain().check_size(u0);

    EvolutionRun run;
    run.u0 = u0;
    run.t_final = t_final;
    run.n_steps = n_steps;
    run.trajectory.reserve(n_steps + 1);
    run.trajectory.push_back(u0);
    const double tau = t_final / n_steps;
    NodeFunction u = u0;
    for (int k = 0; k < n_steps; ++k) {
        auto sol = solve(ResolventProblem(E, phi, tau, 0.0, u), opts);
        u = sol.u;
        run.trajectory.push_back(u);
        run.diagnostics.push_back({sol.iterations, sol.kkt_residual});
    }
    return run;
}

struct ContractionReport {
    bool t_contraction_ok = true;      // ||[uA - uB]+||_1 nonincreasing
    double worst_t_margin = 0.0;       // min over steps of gap_k - gap_{k+1}
    bool l1_contraction_ok = true;     // ||uA - uB||_1 nonincreasing
    double worst_l1_margin = 0.0;
    bool initially_ordered = false;    // u0_A <= u0_B pointwise
    bool order_preserved = true;       // meaningful when initially_ordered
    double worst_order_margin = 0.0;   // min over steps/nodes of uB - uA
};

// Per-step T-contraction and order-preservation monitoring for two runs on
// the same grid and step schedule.
inline ContractionReport compare_trajectories(const DiscreteDomain& dom, const EvolutionRun& a,
                                              const EvolutionRun& b, double slack_t = 1e-8,
                                              double slack_order = 1e-10) {
    if (a.n_steps != b.n_steps || a.t_final != b.t_final)
        throw std::invalid_argument("compare_trajectories: step schedules differ");
    if (a.trajectory.size() != b.trajectory.size())
        throw std::invalid_argument("compare_trajectories: trajectory lengths differ");

    ContractionReport rep;
    const int n = dom.node_count();

    const auto positive_gap = [&](const NodeFunction& ua, const NodeFunction& ub) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += dom.measure()[i] * std::max(ua[i] - ub[i], 0.0);
        return s;
    };

    rep.initially_ordered = true;
    for (int i = 0; i < n; ++i)
        if (a.u0[i] > b.u0[i]) rep.initially_ordered = false;

    double prev_gap = positive_gap(a.trajectory[0], b.trajectory[0]);
    double prev_l1 = prev_gap + positive_gap(b.trajectory[0], a.trajectory[0]);
    rep.worst_t_margin = std::numeric_limits<double>::infinity();
    rep.worst_l1_margin = std::numeric_limits<double>::infinity();
    rep.worst_order_margin = std::numeric_limits<double>::infinity();

    for (std::size_t k = 1; k < a.trajectory.size(); ++k) {
        const auto& ua = a.trajectory[k];
        const auto& ub = b.trajectory[k];
        const double gap = positive_gap(ua, ub);
        const double l1 = gap + positive_gap(ub, ua);
        rep.worst_t_margin = std::min(rep.worst_t_margin, prev_gap - gap);
        rep.worst_l1_margin = std::min(rep.worst_l1_margin, prev_l1 - l1);
        if (gap > prev_gap + slack_t) rep.t_contraction_ok = false;
        if (l1 > prev_l1 + slack_t) rep.l1_contraction_ok = false;
        prev_gap = gap;
        prev_l1 = l1;
        if (rep.initially_ordered) {
            for (int i = 0; i < n; ++i) {
                rep.worst_order_margin = std::min(rep.worst_order_margin, ub[i] - ua[i]);
                if (ua[i] > ub[i] + slack_order) rep.order_preserved = false;
            }
        }
    }
    return rep;
}

// CSV columns: step, time, L1, L2, Linf, mass.
inline CsvTable trajectory_csv(const DiscreteDomain& dom, const EvolutionRun& run) {
    CsvTable t;
    t.columns = {"step", "time", "l1", "l2", "linf", "mass"};
    const double tau = run.tau();
    for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
        const auto& u = run.trajectory[k];
        t.rows.push_back({static_cast<double>(k), tau * static_cast<double>(k), norm(dom, u, Norm::L1),
                          norm(dom, u, Norm::L2), norm(dom, u, Norm::Linf), integrate(dom, u)});
    }
    return t;
}

}  // namespace dnl
