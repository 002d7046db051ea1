#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnl/domain.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearity.hpp"
#include "dnl/random.hpp"
#include "dnl/report.hpp"

namespace dnl {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

// Proper convex functional on node vectors with E(0) = 0 and subgradient
// access. The subgradient is exposed as a single-valued selection in the
// mu-weighted pairing: <v, xi>_mu = dE(u)[xi] for test vectors xi vanishing
// on the boundary, i.e. v_i = (dE/du_i) / mu_i on free nodes and 0 on
// boundary nodes.
class Energy {
public:
    virtual ~Energy() = default;

    const DiscreteDomain& domain() const { return dom_; }
    double eps_reg() const { return eps_; }
    virtual std::string kind() const = 0;

    double value(const NodeFunction& u) const {
        dom_.check_size(u);
        return value_impl(u);
    }

    NodeFunction subgradient(const NodeFunction& u) const {
        dom_.check_size(u);
        NodeFunction raw(u.size(), 0.0);
        add_gradient_raw(u, raw);
        NodeFunction v(u.size(), 0.0);
        for (int i : dom_.free_nodes()) v[i] = raw[i] / dom_.measure()[i];
        return v;
    }

    // Raw partial derivatives dE/du_i, accumulated into g over all nodes.
    virtual void add_gradient_raw(const NodeFunction& u, NodeFunction& g) const = 0;

    // Raw second partials d2E/du_i du_j as triplets (all node indices;
    // solvers restrict to free nodes).
    virtual void add_hessian_raw(const NodeFunction& u, std::vector<Triplet>& h) const = 0;

protected:
    Energy(DiscreteDomain dom, double eps_reg) : dom_(std::move(dom)), eps_(eps_reg) {}
    virtual double value_impl(const NodeFunction& u) const = 0;

    DiscreteDomain dom_;
    double eps_;
};

// Graph p-Dirichlet energy E(u) = (1/p) sum_edges w_ij |u_i - u_j|^p.
//
// For p < 2 the edge term is smoothed to ((d^2 + eps^2)^{p/2} - eps^p)/p;
// the constant shift keeps E(0) = 0 exact and leaves the gradient
// untouched. Default eps_reg: 0 for p >= 2, 1e-8 for p < 2.
class GraphPDirichletEnergy final : public Energy {
public:
    GraphPDirichletEnergy(DiscreteDomain dom, double p, std::optional<double> eps_reg = std::nullopt)
        : Energy(std::move(dom), eps_reg.value_or(p < 2.0 ? 1e-8 : 0.0)), p_(p) {
        if (!(p > 1.0)) throw std::invalid_argument("p-Dirichlet energy requires p > 1");
        if (eps_ < 0.0) throw std::invalid_argument("eps_reg must be nonnegative");
    }

    std::string kind() const override { return "p_dirichlet"; }
    double p() const { return p_; }

    void add_gradient_raw(const NodeFunction& u, NodeFunction& g) const override {
        for (const auto& e : dom_.edges()) {
            const double t = edge_d1(u[e.i] - u[e.j]) * e.w;
            g[e.i] += t;
            g[e.j] -= t;
        }
    }

    void add_hessian_raw(const NodeFunction& u, std::vector<Triplet>& h) const override {
        for (const auto& e : dom_.edges()) {
            const double c = edge_d2(u[e.i] - u[e.j]) * e.w;
            h.push_back({e.i, e.i, c});
            h.push_back({e.j, e.j, c});
            h.push_back({e.i, e.j, -c});
            h.push_back({e.j, e.i, -c});
        }
    }

private:
    double value_impl(const NodeFunction& u) const override {
        double s = 0.0;
        for (const auto& e : dom_.edges()) s += e.w * edge_potential(u[e.i] - u[e.j]);
        return s;
    }

    double edge_potential(double d) const {
        if (eps_ > 0.0)
            return (std::pow(d * d + eps_ * eps_, 0.5 * p_) - std::pow(eps_, p_)) / p_;
        return std::pow(std::abs(d), p_) / p_;
    }

    double edge_d1(double d) const {
        if (eps_ > 0.0) return d * std::pow(d * d + eps_ * eps_, 0.5 * p_ - 1.0);
        if (d == 0.0) {
            if (p_ < 2.0) throw SingularGradientError("p < 2 gradient at an exact kink; set eps_reg > 0");
            return 0.0;
        }
        return std::copysign(std::pow(std::abs(d), p_ - 1.0), d);
    }

    double edge_d2(double d) const {
        if (eps_ > 0.0) {
            const double q = d * d + eps_ * eps_;
            return std::pow(q, 0.5 * p_ - 2.0) * ((p_ - 1.0) * d * d + eps_ * eps_);
        }
        if (d == 0.0) {
            if (p_ < 2.0) throw SingularGradientError("p < 2 curvature at an exact kink; set eps_reg > 0");
            return p_ == 2.0 ? 1.0 : 0.0;
        }
        return (p_ - 1.0) * std::pow(std::abs(d), p_ - 2.0);
    }

    double p_;
};

// Data for a 1D divergence-form operator -d/dx a(x, u') built from a flux a
// and a potential A with dA/dxi = a. Growth, coercivity and monotonicity are
// recorded as coefficient data (a0, a1, a2, eta) and verified by
// check_structure below.
struct LerayLionsSpec {
    double p = 2.0;
    std::function<double(double, double)> flux;       // a(x, xi)
    std::function<double(double, double)> potential;  // A(x, xi)
    std::function<double(double, double)> flux_dxi;   // optional; numeric fallback
    std::function<double(double)> a0;                 // growth weight (L^inf role)
    std::function<double(double)> a1;                 // growth offset
    std::function<double(double)> a2;                 // coercivity offset
    double eta = 1.0;

    // Built-in weighted p-flux a(x, xi) = kappa(x) |xi|^{p-2} xi with
    // potential kappa(x) |xi|^p / p, smoothed the same way as the graph
    // energy when eps_reg > 0.
    static LerayLionsSpec weighted_p_flux(double p, std::function<double(double)> kappa, double eps_reg = 0.0,
                                          double eta = 1.0) {
        if (!(p > 1.0)) throw std::invalid_argument("weighted_p_flux requires p > 1");
        LerayLionsSpec s;
        s.p = p;
        const double e2 = eps_reg * eps_reg;
        const double ep = eps_reg > 0.0 ? std::pow(eps_reg, p) : 0.0;
        s.flux = [kappa, p, e2](double x, double xi) {
            if (e2 > 0.0) return kappa(x) * xi * std::pow(xi * xi + e2, 0.5 * p - 1.0);
            return xi == 0.0 ? 0.0 : kappa(x) * std::copysign(std::pow(std::abs(xi), p - 1.0), xi);
        };
        s.potential = [kappa, p, e2, ep](double x, double xi) {
            if (e2 > 0.0) return kappa(x) * (std::pow(xi * xi + e2, 0.5 * p) - ep) / p;
            return kappa(x) * std::pow(std::abs(xi), p) / p;
        };
        s.flux_dxi = [kappa, p, e2](double x, double xi) {
            if (e2 > 0.0) {
                const double q = xi * xi + e2;
                return kappa(x) * std::pow(q, 0.5 * p - 2.0) * ((p - 1.0) * xi * xi + e2);
            }
            if (xi == 0.0) return p == 2.0 ? kappa(x) : (p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity());
            return kappa(x) * (p - 1.0) * std::pow(std::abs(xi), p - 2.0);
        };
        s.a0 = kappa;
        s.a1 = [](double) { return 0.0; };
        s.a2 = [](double) { return 0.0; };
        s.eta = eta;
        return s;
    }
};

// E(u) = sum_cells h * A(x_k, Du_k) on a path grid, with forward differences
// Du_k = (u_{k+1} - u_k)/h and cell midpoints x_k = (k + 1/2) h.
class LerayLions1DEnergy final : public Energy {
public:
    LerayLions1DEnergy(DiscreteDomain dom, LerayLionsSpec spec, double eps_reg = 0.0)
        : Energy(std::move(dom), eps_reg), spec_(std::move(spec)) {
        if (!spec_.flux || !spec_.potential)
            throw std::invalid_argument("leray_lions: flux and potential callbacks are required");
        validate_path_grid();
        h_ = dom_.grid_spacing();
        for (int k = 0; k + 1 < dom_.node_count(); ++k) cell_x_.push_back((k + 0.5) * h_);
    }

    std::string kind() const override { return "leray_lions"; }
    const LerayLionsSpec& spec() const { return spec_; }
    double spacing() const { return h_; }
    double domain_length() const { return h_ * (dom_.node_count() - 1); }

    void add_gradient_raw(const NodeFunction& u, NodeFunction& g) const override {
        for (std::size_t k = 0; k + 1 < u.size(); ++k) {
            const double a = spec_.flux(cell_x_[k], diff(u, k));
            g[k] -= a;
            g[k + 1] += a;
        }
    }

    void add_hessian_raw(const NodeFunction& u, std::vector<Triplet>& h) const override {
        for (std::size_t k = 0; k + 1 < u.size(); ++k) {
            const double c = flux_dxi(cell_x_[k], diff(u, k)) / h_;
            const int i = static_cast<int>(k), j = i + 1;
            h.push_back({i, i, c});
            h.push_back({j, j, c});
            h.push_back({i, j, -c});
            h.push_back({j, i, -c});
        }
    }

private:
    double value_impl(const NodeFunction& u) const override {
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < u.size(); ++k) s += h_ * spec_.potential(cell_x_[k], raw_diff(u, k));
        return s;
    }

    double raw_diff(const NodeFunction& u, std::size_t k) const { return (u[k + 1] - u[k]) / h_; }

    double diff(const NodeFunction& u, std::size_t k) const {
        const double d = raw_diff(u, k);
        if (d == 0.0 && spec_.p < 2.0 && eps_ == 0.0)
            throw SingularGradientError("p < 2 flux at an exact kink; use eps_reg > 0");
        return d;
    }

    double flux_dxi(double x, double xi) const {
        if (spec_.flux_dxi) return spec_.flux_dxi(x, xi);
        const double step = 1e-6 * std::max(1.0, std::abs(xi));
        return (spec_.flux(x, xi + step) - spec_.flux(x, xi - step)) / (2.0 * step);
    }

    void validate_path_grid() const {
        const int n = dom_.node_count();
        if (!(dom_.grid_spacing() > 0.0) || static_cast<int>(dom_.edges().size()) != n - 1)
            throw std::invalid_argument("leray_lions: domain must be a 1D path grid (build_path_grid)");
        for (int k = 0; k + 1 < n; ++k) {
            const auto& e = dom_.edges()[k];
            if (e.i != k || e.j != k + 1)
                throw std::invalid_argument("leray_lions: domain edges are not a consecutive path");
        }
        if (!dom_.is_boundary(0) || !dom_.is_boundary(n - 1))
            throw std::invalid_argument("leray_lions: path ends must be boundary nodes");
    }

    LerayLionsSpec spec_;
    std::vector<double> cell_x_;
    double h_ = 0.0;
};

// ---------------------------------------------------------------------------
// Structure conditions of the flux/potential pair.

struct StructureSampler {
    std::uint64_t seed = 42;
    int count = 200;
    double x_lo = 0.0;
    double x_hi = 1.0;
    double xi_max = 8.0;
    // The gradient-consistency condition is sampled away from the kink at
    // xi = 0: for p < 2 the higher derivatives of the potential blow up
    // there and central differences lose accuracy, which is a numerical
    // artifact rather than a structure violation.
    double xi_min_gradient = 0.05;
};

// Checks a(x,0) = 0, the p-growth bound, eta-coercivity, monotonicity of a
// in xi, and dA/dxi = a (central differences). Failures are data, not
// exceptions: each condition reports its worst margin and witness.
inline AuditReport check_structure(const LerayLionsSpec& spec, const StructureSampler& sampler, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("check_structure: tolerance must be positive");
    AuditReport rep;
    rep.header["seed"] = sampler.seed;
    rep.header["samples"] = sampler.count;
    rep.header["tolerance"] = tol;
    rep.header["p"] = spec.p;

    Check zero = Check::make("structure_zero", tol);
    Check growth = Check::make("structure_growth", tol);
    Check coercivity = Check::make("structure_coercivity", tol);
    Check monotonicity = Check::make("structure_monotonicity", tol);
    Check gradient = Check::make("structure_gradient", tol);

    SplitMix64 rng(SplitMix64::substream(sampler.seed, 201));
    for (int t = 0; t < sampler.count; ++t) {
        const double x = rng.uniform(sampler.x_lo, sampler.x_hi);
        const double xi1 = rng.uniform(-sampler.xi_max, sampler.xi_max);
        const double xi2 = rng.uniform(-sampler.xi_max, sampler.xi_max);

        zero.record(-std::abs(spec.flux(x, 0.0)), {{"x", x}});

        const double a1v = spec.flux(x, xi1);
        growth.record(spec.a0(x) * std::pow(std::abs(xi1), spec.p - 1.0) + spec.a1(x) - std::abs(a1v),
                      {{"x", x}, {"xi", xi1}});
        coercivity.record(a1v * xi1 - spec.eta * std::pow(std::abs(xi1), spec.p) + spec.a2(x),
                          {{"x", x}, {"xi", xi1}});
        monotonicity.record((a1v - spec.flux(x, xi2)) * (xi1 - xi2), {{"x", x}, {"xi1", xi1}, {"xi2", xi2}});

        const double sgn = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double xig = sgn * rng.uniform(sampler.xi_min_gradient, sampler.xi_max);
        const double step = 1e-6 * std::max(1.0, std::abs(xig));
        const double cd = (spec.potential(x, xig + step) - spec.potential(x, xig - step)) / (2.0 * step);
        const double av = spec.flux(x, xig);
        const double scale = std::max({1.0, std::abs(av), std::abs(cd)});
        gradient.record(-std::abs(cd - av) / scale, {{"x", x}, {"xi", xig}});
    }

    rep.checks = {zero, growth, coercivity, monotonicity, gradient};
    return rep;
}

struct CheckResult {
    bool pass = true;
    double margin = 0.0;
};

// Truncation inequality E(u + T(u_hat - u)) + E(u_hat - T(u_hat - u)) <=
// E(u) + E(u_hat); margin is RHS - LHS.
inline CheckResult check_H2star(const Energy& E, const NodeFunction& u, const NodeFunction& u_hat,
                                const TruncationP0& T, double tol) {
    E.domain().check_size(u);
    E.domain().check_size(u_hat);
    const std::size_t n = u.size();
    NodeFunction left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = T(u_hat[i] - u[i]);
        left[i] = u[i] + t;
        right[i] = u_hat[i] - t;
    }
    const double margin = E.value(u) + E.value(u_hat) - E.value(left) - E.value(right);
    return {margin >= -tol, margin};
}

// phi(u+) = [phi(u)]+ and phi(u-) = [phi(u)]-, exact up to the float
// evaluation of phi (monotonicity and phi(0) = 0 make both sides evaluate to
// identical numbers).
inline bool lattice_identity_check(const Nonlinearity& phi, const NodeFunction& u) {
    for (double r : u) {
        const double fr = phi(r);
        if (phi(std::max(r, 0.0)) != std::max(fr, 0.0)) return false;
        if (phi(std::min(r, 0.0)) != std::min(fr, 0.0)) return false;
    }
    return true;
}

}  // namespace dnl
