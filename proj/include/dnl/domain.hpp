#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

// Node-indexed real function. Solvers keep boundary entries exactly zero.
using NodeFunction = std::vector<double>;

struct Edge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Finite weighted graph with a per-node measure. Homogeneous Dirichlet
// conditions are encoded as pinned nodes (boundary_mask true => value 0), so
// every energy sees the same mechanism.
class DiscreteDomain {
public:
    DiscreteDomain(std::vector<double> measure, std::vector<Edge> edges,
                   std::vector<bool> boundary_mask, double grid_spacing = 0.0)
        : measure_(std::move(measure)),
          edges_(std::move(edges)),
          boundary_(std::move(boundary_mask)),
          spacing_(grid_spacing) {
        const int n = node_count();
        if (n == 0) throw std::invalid_argument("domain: empty node set");
        if (boundary_.size() != measure_.size())
            throw DimensionError("domain: boundary mask length mismatch");
        for (double m : measure_)
            if (!(m > 0.0) || !std::isfinite(m))
                throw std::invalid_argument("domain: node measures must be positive");

        std::set<std::pair<int, int>> seen;
        for (auto& e : edges_) {
            if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
                throw std::invalid_argument("domain: edge endpoint out of range");
            if (e.i == e.j) throw std::invalid_argument("domain: self-loop");
            if (!(e.w > 0.0) || !std::isfinite(e.w))
                throw std::invalid_argument("domain: edge weights must be positive");
            if (e.i > e.j) std::swap(e.i, e.j);
            if (!seen.insert({e.i, e.j}).second)
                throw std::invalid_argument("domain: duplicate undirected edge");
        }

        int free = 0;
        for (int i = 0; i < n; ++i) {
            if (!boundary_[i]) {
                free_nodes_.push_back(i);
                ++free;
            }
        }
        if (free == 0) throw std::invalid_argument("domain: needs at least one non-boundary node");
    }

    int node_count() const { return static_cast<int>(measure_.size()); }
    const std::vector<double>& measure() const { return measure_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool is_boundary(int i) const { return boundary_[i]; }
    const std::vector<int>& free_nodes() const { return free_nodes_; }
    int free_count() const { return static_cast<int>(free_nodes_.size()); }

    // Positive for path/square grids built by the grid builders; 0 otherwise.
    double grid_spacing() const { return spacing_; }

    double total_mass() const {
        double s = 0.0;
        for (double m : measure_) s += m;
        return s;
    }

    void check_size(const NodeFunction& u) const {
        if (static_cast<int>(u.size()) != node_count())
            throw DimensionError("node function has length " + std::to_string(u.size()) +
                                 ", domain has " + std::to_string(node_count()) + " nodes");
    }

    NodeFunction zero() const { return NodeFunction(measure_.size(), 0.0); }

private:
    std::vector<double> measure_;
    std::vector<Edge> edges_;
    std::vector<bool> boundary_;
    std::vector<int> free_nodes_;
    double spacing_ = 0.0;
};

enum class Norm { L1, L2, Linf };

// integral of u against the measure: sum_i mu_i u_i
inline double integrate(const DiscreteDomain& dom, const NodeFunction& u) {
    dom.check_size(u);
    double s = 0.0;
    for (int i = 0; i < dom.node_count(); ++i) s += dom.measure()[i] * u[i];
    return s;
}

// <u, v> = sum_i mu_i u_i v_i
inline double inner_product(const DiscreteDomain& dom, const NodeFunction& u, const NodeFunction& v) {
    dom.check_size(u);
    dom.check_size(v);
    double s = 0.0;
    for (int i = 0; i < dom.node_count(); ++i) s += dom.measure()[i] * u[i] * v[i];
    return s;
}

// Linf ignores the measure: on a finite space with mu_i > 0 the essential
// supremum is the plain maximum.
inline double norm(const DiscreteDomain& dom, const NodeFunction& u, Norm which) {
    dom.check_size(u);
    double s = 0.0;
    switch (which) {
        case Norm::L1:
            for (int i = 0; i < dom.node_count(); ++i) s += dom.measure()[i] * std::abs(u[i]);
            return s;
        case Norm::L2:
            for (int i = 0; i < dom.node_count(); ++i) s += dom.measure()[i] * u[i] * u[i];
            return std::sqrt(s);
        case Norm::Linf:
            for (double x : u) s = std::max(s, std::abs(x));
            return s;
    }
    return s;
}

// u+ = max(u, 0)
inline NodeFunction positive_part(const NodeFunction& u) {
    NodeFunction r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::max(u[i], 0.0);
    return r;
}

// u- = min(u, 0), so u = u+ + u- exactly
inline NodeFunction negative_part(const NodeFunction& u) {
    NodeFunction r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::min(u[i], 0.0);
    return r;
}

inline bool has_zero_boundary(const DiscreteDomain& dom, const NodeFunction& u) {
    dom.check_size(u);
    for (int i = 0; i < dom.node_count(); ++i)
        if (dom.is_boundary(i) && u[i] != 0.0) return false;
    return true;
}

inline void pin_boundary(const DiscreteDomain& dom, NodeFunction& u) {
    dom.check_size(u);
    for (int i = 0; i < dom.node_count(); ++i)
        if (dom.is_boundary(i)) u[i] = 0.0;
}

// 1D path grid with homogeneous Dirichlet ends: nodes 0..n_interior+1 in
// order, edges (k, k+1) with weight 1/h, measure h everywhere. With p = 2
// the graph energy (1/2) sum w (u_i - u_j)^2 then equals the standard
// finite-difference Dirichlet energy. Boundary measures never enter any
// integral of a pinned function; h keeps the constructor invariant mu > 0.
inline DiscreteDomain build_path_grid(int n_interior, double h) {
    if (n_interior < 1) throw std::invalid_argument("build_path_grid: n_interior must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("build_path_grid: spacing must be positive");
    const int n = n_interior + 2;
    std::vector<double> mu(n, h);
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    for (int k = 0; k + 1 < n; ++k) edges.push_back({k, k + 1, 1.0 / h});
    std::vector<bool> boundary(n, false);
    boundary.front() = boundary.back() = true;
    return DiscreteDomain(std::move(mu), std::move(edges), std::move(boundary), h);
}

// 2D tensor grid (5-point stencil), boundary ring pinned. Unit edge weights
// make the p = 2 energy match the finite-difference Dirichlet energy in two
// dimensions; measures are h^2. Emits the same DiscreteDomain type, no
// special-cased code paths downstream.
inline DiscreteDomain build_square_grid(int nx_interior, int ny_interior, double h) {
    if (nx_interior < 1 || ny_interior < 1)
        throw std::invalid_argument("build_square_grid: interior counts must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("build_square_grid: spacing must be positive");
    const int nx = nx_interior + 2, ny = ny_interior + 2;
    const auto id = [nx](int ix, int iy) { return iy * nx + ix; };
    std::vector<double> mu(static_cast<std::size_t>(nx) * ny, h * h);
    std::vector<bool> boundary(mu.size(), false);
    std::vector<Edge> edges;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            if (ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1) boundary[id(ix, iy)] = true;
            if (ix + 1 < nx) edges.push_back({id(ix, iy), id(ix + 1, iy), 1.0});
            if (iy + 1 < ny) edges.push_back({id(ix, iy), id(ix, iy + 1), 1.0});
        }
    }
    return DiscreteDomain(std::move(mu), std::move(edges), std::move(boundary), h);
}

}  // namespace dnl
