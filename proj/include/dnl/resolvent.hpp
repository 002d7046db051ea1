#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearity.hpp"

namespace dnl {

// Regularized resolvent problem
//
//     u + lambda (nu phi(u) + dE(phi(u))) = f.
//
// In the substituted variable w = phi(u) this is the first-order condition of
//
//     G(w) = sum_i mu_i Psi(w_i) + (lambda nu / 2) sum_i mu_i w_i^2
//            + lambda E(w) - sum_i mu_i f_i w_i,
//
// which is strictly convex (Psi' = phi^{-1} strictly increasing) and coercive
// (phi^{-1} surjective makes Psi superlinear), so the solution exists and is
// unique. Minimizing in u instead would not be convex in general.
struct ResolventProblem {
    const Energy* energy = nullptr;
    const Nonlinearity* phi = nullptr;
    double lambda = 1.0;
    double nu = 0.0;
    NodeFunction f;

    ResolventProblem(const Energy& E, const Nonlinearity& phi_fn, double lambda_, double nu_, NodeFunction f_)
        : energy(&E), phi(&phi_fn), lambda(lambda_), nu(nu_), f(std::move(f_)) {
        if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
        if (!(nu >= 0.0)) throw std::invalid_argument("resolvent: nu must be nonnegative");
        E.domain().check_size(f);
        for (double v : f)
            if (!std::isfinite(v)) throw std::invalid_argument("resolvent: f must be finite");
        if (!has_zero_boundary(E.domain(), f))
            throw std::invalid_argument("resolvent: f must vanish on boundary nodes");
    }
};

struct IterationRecord {
    int iteration = 0;
    double residual = 0.0;
    double step_size = 0.0;
    double objective = 0.0;
    bool newton_step = true;
};

struct ResolventSolution {
    NodeFunction u;  // phi^{-1}(w)
    NodeFunction w;  // phi(u)
    double kkt_residual = 0.0;
    int iterations = 0;
    double objective_value = 0.0;
    std::vector<IterationRecord> diagnostics;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 500;
    int max_line_search = 60;
    std::optional<NodeFunction> initial_w;
};

inline double objective(const ResolventProblem& prob, const NodeFunction& w) {
    const auto& dom = prob.energy->domain();
    dom.check_size(w);
    if (!has_zero_boundary(dom, w))
        throw std::invalid_argument("objective: w must vanish on boundary nodes");
    double s = 0.0;
    for (int i = 0; i < dom.node_count(); ++i) {
        const double mu = dom.measure()[i];
        s += mu * (prob.phi->primitive(w[i]) + 0.5 * prob.lambda * prob.nu * w[i] * w[i] - prob.f[i] * w[i]);
    }
    return s + prob.lambda * prob.energy->value(w);
}

namespace detail {

struct NewtonWorkspace {
    std::vector<int> free_index;            // node -> free slot, -1 on boundary
    std::vector<Triplet> energy_h;
    std::vector<Eigen::Triplet<double>> trips;
};

// Inclusion residual phi^{-1}(w) + lambda nu w + lambda dE(w) - f on free
// nodes, in the mu-weighted L2 norm. Written in terms of w; callers pass
// w = phi(u) to get the u-form of the same residual.
inline double inclusion_residual(const ResolventProblem& prob, const NodeFunction& w, NodeFunction& scratch) {
    const auto& dom = prob.energy->domain();
    std::fill(scratch.begin(), scratch.end(), 0.0);
    prob.energy->add_gradient_raw(w, scratch);
    double s = 0.0;
    for (int i : dom.free_nodes()) {
        const double r = prob.phi->inverse(w[i]) + prob.lambda * prob.nu * w[i] +
                         prob.lambda * scratch[i] / dom.measure()[i] - prob.f[i];
        s += dom.measure()[i] * r * r;
    }
    return std::sqrt(s);
}

// Solve H d = rhs trying increasingly strong diagonal shifts; returns false
// when no finite solution was produced.
template <class Factorization>
bool factor_and_solve(std::vector<Eigen::Triplet<double>>& trips, int nf, double diag_scale,
                      const Eigen::VectorXd& rhs, Eigen::VectorXd& d) {
    using SpMat = Eigen::SparseMatrix<double>;
    const double shifts[] = {0.0, 1e-10, 1e-6, 1e-2, 1.0};
    const std::size_t base = trips.size();
    for (double shift : shifts) {
        trips.resize(base);
        if (shift > 0.0)
            for (int k = 0; k < nf; ++k) trips.emplace_back(k, k, shift * diag_scale);
        SpMat H(nf, nf);
        H.setFromTriplets(trips.begin(), trips.end());
        Factorization fact(H);
        if (fact.info() != Eigen::Success) continue;
        d = fact.solve(rhs);
        if (d.allFinite()) {
            trips.resize(base);
            return true;
        }
    }
    trips.resize(base);
    return false;
}

// Damped Newton on the convex objective G(w). Acceptance is Armijo on G or,
// when the objective can no longer resolve the decrease, a strict reduction
// of the inclusion residual. Suited to nonlinearities whose inverse has
// bounded slope near 0 (fast-diffusion power laws, piecewise linear,
// identity).
inline ResolventSolution solve_in_w(const ResolventProblem& prob, const SolveOptions& opts,
                                    NodeFunction w) {
    const auto& dom = prob.energy->domain();
    const auto& free = dom.free_nodes();
    const int nf = dom.free_count();
    const int n = dom.node_count();

    NewtonWorkspace ws;
    ws.free_index.assign(n, -1);
    for (int k = 0; k < nf; ++k) ws.free_index[free[k]] = k;

    NodeFunction g(n, 0.0), scratch(n, 0.0);
    const auto gradient_raw = [&](const NodeFunction& at) {
        std::fill(g.begin(), g.end(), 0.0);
        prob.energy->add_gradient_raw(at, g);
        for (int i : free) {
            const double mu = dom.measure()[i];
            g[i] = mu * (prob.phi->inverse(at[i]) + prob.lambda * prob.nu * at[i] - prob.f[i]) +
                   prob.lambda * g[i];
        }
    };

    gradient_raw(w);
    double residual = inclusion_residual(prob, w, scratch);
    double obj = objective(prob, w);

    ResolventSolution sol;
    sol.diagnostics.push_back({0, residual, 0.0, obj, true});

    Eigen::VectorXd rhs(nf), d(nf);
    NodeFunction w_trial(n, 0.0);
    int iter = 0;

    while (residual > opts.tol && iter < opts.max_iter) {
        ++iter;

        ws.energy_h.clear();
        prob.energy->add_hessian_raw(w, ws.energy_h);
        ws.trips.clear();
        double diag_scale = 1.0;
        for (int k = 0; k < nf; ++k) {
            const int i = free[k];
            const double curv = std::clamp(prob.phi->inverse_derivative(w[i]), 0.0, 1e12);
            const double dval = dom.measure()[i] * (curv + prob.lambda * prob.nu);
            ws.trips.emplace_back(k, k, dval);
            diag_scale = std::max(diag_scale, dval);
        }
        for (const auto& t : ws.energy_h) {
            const int r = ws.free_index[t.row], c = ws.free_index[t.col];
            if (r >= 0 && c >= 0) {
                ws.trips.emplace_back(r, c, prob.lambda * t.value);
                if (r == c) diag_scale = std::max(diag_scale, std::abs(prob.lambda * t.value));
            }
        }
        for (int k = 0; k < nf; ++k) rhs[k] = -g[free[k]];

        bool newton_step =
            factor_and_solve<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(ws.trips, nf, diag_scale,
                                                                                 rhs, d);
        if (newton_step) {
            double slope = 0.0;
            for (int k = 0; k < nf; ++k) slope -= rhs[k] * d[k];
            if (!(slope < 0.0)) newton_step = false;
        }
        if (!newton_step) d = rhs / diag_scale;

        double dmax = 0.0, wmax = 1.0;
        for (int k = 0; k < nf; ++k) dmax = std::max(dmax, std::abs(d[k]));
        for (int i : free) wmax = std::max(wmax, std::abs(w[i]));
        if (dmax > 1e8 * wmax) d *= (1e8 * wmax) / dmax;

        double slope = 0.0;
        for (int k = 0; k < nf; ++k) slope += g[free[k]] * d[k];

        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            for (int k = 0; k < nf; ++k) w_trial[free[k]] = w[free[k]] + step * d[k];
            const double obj_trial = objective(prob, w_trial);
            if (std::isfinite(obj_trial) && obj_trial <= obj + 1e-4 * step * slope) {
                accepted = true;
                obj = obj_trial;
                break;
            }
            const double res_trial = inclusion_residual(prob, w_trial, scratch);
            if (std::isfinite(res_trial) && res_trial <= (1.0 - 1e-4 * step) * residual) {
                accepted = true;
                obj = obj_trial;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw SolverError("resolvent: line search stalled at residual " + std::to_string(residual), w,
                              residual, iter);

        for (int k = 0; k < nf; ++k) w[free[k]] = w_trial[free[k]];
        gradient_raw(w);
        residual = inclusion_residual(prob, w, scratch);
        sol.diagnostics.push_back({iter, residual, step, obj, newton_step});
    }

    sol.w = std::move(w);
    sol.iterations = iter;
    return sol;
}

// Newton on the u-form residual F(u) = u + lambda nu phi(u) +
// lambda dE(phi(u)) - f with backtracking on ||F||. The Jacobian
// I + lambda (nu I + H_E) diag(phi') is nonsingular whenever H_E is positive
// semidefinite, including where phi' vanishes, which makes this the robust
// regime for slow-diffusion nonlinearities (phi^{-1} has infinite slope at 0
// there, so the w-form Newton model breaks down).
inline ResolventSolution solve_in_u(const ResolventProblem& prob, const SolveOptions& opts,
                                    NodeFunction u) {
    const auto& dom = prob.energy->domain();
    const auto& free = dom.free_nodes();
    const int nf = dom.free_count();
    const int n = dom.node_count();

    NewtonWorkspace ws;
    ws.free_index.assign(n, -1);
    for (int k = 0; k < nf; ++k) ws.free_index[free[k]] = k;

    NodeFunction w(n, 0.0), scratch(n, 0.0);
    const auto to_w = [&](const NodeFunction& at, NodeFunction& out) {
        for (int i : free) out[i] = (*prob.phi)(at[i]);
    };

    to_w(u, w);
    double residual = inclusion_residual(prob, w, scratch);

    ResolventSolution sol;
    sol.diagnostics.push_back({0, residual, 0.0, 0.0, true});

    Eigen::VectorXd rhs(nf), d(nf);
    NodeFunction u_trial(n, 0.0), w_trial(n, 0.0);
    int iter = 0;

    while (residual > opts.tol && iter < opts.max_iter) {
        ++iter;

        // F on free nodes (mu-unweighted components; the norm adds mu).
        std::fill(scratch.begin(), scratch.end(), 0.0);
        prob.energy->add_gradient_raw(w, scratch);
        for (int k = 0; k < nf; ++k) {
            const int i = free[k];
            rhs[k] = -(u[i] + prob.lambda * prob.nu * w[i] +
                       prob.lambda * scratch[i] / dom.measure()[i] - prob.f[i]);
        }

        ws.energy_h.clear();
        prob.energy->add_hessian_raw(w, ws.energy_h);
        ws.trips.clear();
        double diag_scale = 1.0;
        for (int k = 0; k < nf; ++k) {
            const int i = free[k];
            const double dphi = std::clamp(prob.phi->derivative(u[i]), 0.0, 1e12);
            ws.trips.emplace_back(k, k, 1.0 + prob.lambda * prob.nu * dphi);
        }
        for (const auto& t : ws.energy_h) {
            const int r = ws.free_index[t.row], c = ws.free_index[t.col];
            if (r < 0 || c < 0) continue;
            const int cnode = free[c];
            const double dphi = std::clamp(prob.phi->derivative(u[cnode]), 0.0, 1e12);
            const double v = prob.lambda * t.value * dphi / dom.measure()[free[r]];
            ws.trips.emplace_back(r, c, v);
            if (r == c) diag_scale = std::max(diag_scale, std::abs(v));
        }

        const bool newton_step =
            factor_and_solve<Eigen::SparseLU<Eigen::SparseMatrix<double>>>(ws.trips, nf, diag_scale, rhs, d);
        if (!newton_step) d = rhs;  // residual backtracking still applies

        double dmax = 0.0, umax = 1.0;
        for (int k = 0; k < nf; ++k) dmax = std::max(dmax, std::abs(d[k]));
        for (int i : free) umax = std::max(umax, std::abs(u[i]));
        if (dmax > 1e8 * umax) d *= (1e8 * umax) / dmax;

        double step = 1.0;
        bool accepted = false;
        double res_trial = residual;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            for (int k = 0; k < nf; ++k) u_trial[free[k]] = u[free[k]] + step * d[k];
            to_w(u_trial, w_trial);
            res_trial = inclusion_residual(prob, w_trial, scratch);
            if (std::isfinite(res_trial) && res_trial <= (1.0 - 1e-4 * step) * residual) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw SolverError("resolvent: residual line search stalled at " + std::to_string(residual), w,
                              residual, iter);

        for (int k = 0; k < nf; ++k) u[free[k]] = u_trial[free[k]];
        to_w(u, w);
        residual = res_trial;
        sol.diagnostics.push_back({iter, residual, step, 0.0, newton_step});
    }

    sol.w = std::move(w);
    sol.iterations = iter;
    return sol;
}

}  // namespace detail

// Damped Newton with backtracking (Armijo c = 1e-4, halving). The working
// variable depends on the nonlinearity: slow-diffusion types (phi' bounded,
// (phi^{-1})' infinite at 0) iterate in u, everything else minimizes the
// convex objective in w. Initial iterate w0 = phi(f), i.e. u0 = f, the
// lambda -> 0 limit, so continuation sweeps get warm starts.
inline ResolventSolution solve(const ResolventProblem& prob, const SolveOptions& opts = {}) {
    const auto& dom = prob.energy->domain();
    const auto& free = dom.free_nodes();
    const int n = dom.node_count();

    NodeFunction w0(n, 0.0);
    if (opts.initial_w) {
        dom.check_size(*opts.initial_w);
        w0 = *opts.initial_w;
        pin_boundary(dom, w0);
    } else {
        for (int i : free) w0[i] = (*prob.phi)(prob.f[i]);
    }

    const bool slow_diffusion = !(prob.phi->inverse_derivative(0.0) < 1e8);
    ResolventSolution sol;
    if (slow_diffusion) {
        NodeFunction u0(n, 0.0);
        for (int i : free) u0[i] = prob.phi->inverse(w0[i]);
        sol = detail::solve_in_u(prob, opts, std::move(u0));
    } else {
        sol = detail::solve_in_w(prob, opts, std::move(w0));
    }

    NodeFunction scratch(n, 0.0);
    double residual = detail::inclusion_residual(prob, sol.w, scratch);
    if (residual > opts.tol)
        throw SolverError("resolvent: no convergence after " + std::to_string(sol.iterations) +
                              " iterations (residual " + std::to_string(residual) + ")",
                          sol.w, residual, sol.iterations);

    sol.u.assign(n, 0.0);
    for (int i : free) sol.u[i] = prob.phi->inverse(sol.w[i]);
    // Re-derive the residual with w recomputed as phi(u); round-trip noise is
    // far below the tolerance, and this is the inclusion actually reported.
    NodeFunction w2(n, 0.0);
    for (int i : free) w2[i] = (*prob.phi)(sol.u[i]);
    sol.kkt_residual = std::max(residual, detail::inclusion_residual(prob, w2, scratch));
    sol.objective_value = objective(prob, sol.w);
    return sol;
}

// Margin of the inequality
//   <f - u, phi(f) - phi(u)> + lambda (E(phi(u)) - E(phi(f)))
//       <= lambda nu <phi(u), phi(f) - phi(u)>,
// satisfied by every exact solution; returns RHS - LHS.
inline double key_inequality_margin(const ResolventProblem& prob, const ResolventSolution& sol) {
    const auto& dom = prob.energy->domain();
    const int n = dom.node_count();
    NodeFunction phi_f(n, 0.0);
    for (int i = 0; i < n; ++i) phi_f[i] = (*prob.phi)(prob.f[i]);
    double pairing = 0.0, nu_term = 0.0;
    for (int i = 0; i < n; ++i) {
        const double mu = dom.measure()[i];
        pairing += mu * (prob.f[i] - sol.u[i]) * (phi_f[i] - sol.w[i]);
        nu_term += mu * sol.w[i] * (phi_f[i] - sol.w[i]);
    }
    const double lhs = pairing + prob.lambda * (prob.energy->value(sol.w) - prob.energy->value(phi_f));
    const double rhs = prob.lambda * prob.nu * nu_term;
    return rhs - lhs;
}

// f_lambda(x) = (f(x) - u(x)) (phi(f(x)) - phi(u(x))) >= 0 by monotonicity.
inline NodeFunction pointwise_product_flambda(const NodeFunction& f, const ResolventSolution& sol,
                                              const Nonlinearity& phi) {
    if (f.size() != sol.u.size()) throw DimensionError("pointwise_product_flambda: length mismatch");
    NodeFunction r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = (f[i] - sol.u[i]) * (phi(f[i]) - phi(sol.u[i]));
    return r;
}

}  // namespace dnl
