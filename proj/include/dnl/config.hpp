#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/expression.hpp"
#include "dnl/io.hpp"
#include "dnl/nonlinearity.hpp"

namespace dnl {

// Configurable pieces shared by the CLI, the audit harness and the
// experiment suite. JSON shape:
//
//   "domain": {"kind": "grid1d", "n": 64, "h": 1.0}
//           | {"kind": "grid2d", "nx": 8, "ny": 8, "h": 1.0}
//           | {"kind": "file", "path": "graph.json"}
//   "energy": {"kind": "p_dirichlet", "p": 3.0}
//           | {"kind": "leray_lions", "p": 3.0, "kappa": "1+0.5*sin(2*pi*x)"}
//   "phi":    {"kind": "identity"} | {"kind": "power", "m": 2.0}
//           | {"kind": "piecewise_linear", "breakpoints": [...], "slopes": [...]}

struct DomainConfig {
    std::string kind = "grid1d";
    int n = 64;
    int nx = 8, ny = 8;
    double h = 1.0;
    std::string path;
};

struct EnergyConfig {
    std::string kind = "p_dirichlet";
    double p = 2.0;
    double eps_reg = -1.0;  // < 0: per-kind default (0 for p >= 2, 1e-8 for p < 2)
    std::string kappa;      // leray_lions coefficient expression; empty => 1
};

struct PhiConfig {
    std::string kind = "identity";
    double m = 1.0;
    std::vector<double> breakpoints, slopes;
};

inline void from_json(const nlohmann::json& j, DomainConfig& c) {
    c.kind = j.value("kind", std::string("grid1d"));
    c.n = j.value("n", 64);
    c.nx = j.value("nx", 8);
    c.ny = j.value("ny", 8);
    c.h = j.value("h", 1.0);
    c.path = j.value("path", std::string());
}

inline void to_json(nlohmann::json& j, const DomainConfig& c) {
    j = {{"kind", c.kind}, {"h", c.h}};
    if (c.kind == "grid1d") j["n"] = c.n;
    if (c.kind == "grid2d") {
        j["nx"] = c.nx;
        j["ny"] = c.ny;
    }
    if (c.kind == "file") j["path"] = c.path;
}

inline void from_json(const nlohmann::json& j, EnergyConfig& c) {
    c.kind = j.value("kind", std::string("p_dirichlet"));
    c.p = j.value("p", 2.0);
    c.eps_reg = j.value("eps_reg", -1.0);
    c.kappa = j.value("kappa", std::string());
}

inline void to_json(nlohmann::json& j, const EnergyConfig& c) {
    j = {{"kind", c.kind}, {"p", c.p}};
    if (c.eps_reg >= 0.0) j["eps_reg"] = c.eps_reg;
    if (!c.kappa.empty()) j["kappa"] = c.kappa;
}

inline void from_json(const nlohmann::json& j, PhiConfig& c) {
    c.kind = j.value("kind", std::string("identity"));
    c.m = j.value("m", 1.0);
    c.breakpoints = j.value("breakpoints", std::vector<double>());
    c.slopes = j.value("slopes", std::vector<double>());
}

inline void to_json(nlohmann::json& j, const PhiConfig& c) {
    j = {{"kind", c.kind}};
    if (c.kind == "power") j["m"] = c.m;
    if (c.kind == "piecewise_linear") {
        j["breakpoints"] = c.breakpoints;
        j["slopes"] = c.slopes;
    }
}

inline DiscreteDomain build_domain(const DomainConfig& c) {
    if (c.kind == "grid1d") return build_path_grid(c.n, c.h);
    if (c.kind == "grid2d") return build_square_grid(c.nx, c.ny, c.h);
    if (c.kind == "file") return domain_from_json(read_json_file(c.path));
    throw std::invalid_argument("domain config: unknown kind '" + c.kind + "'");
}

inline Nonlinearity build_phi(const PhiConfig& c) {
    if (c.kind == "identity") return Nonlinearity::identity();
    if (c.kind == "power") return Nonlinearity::power(c.m);
    if (c.kind == "piecewise_linear") return Nonlinearity::piecewise_linear(c.breakpoints, c.slopes);
    throw std::invalid_argument("phi config: unknown kind '" + c.kind + "'");
}

inline std::unique_ptr<Energy> build_energy(const EnergyConfig& c, DiscreteDomain dom) {
    const double eps = c.eps_reg >= 0.0 ? c.eps_reg : (c.p < 2.0 ? 1e-8 : 0.0);
    if (c.kind == "p_dirichlet") return std::make_unique<GraphPDirichletEnergy>(std::move(dom), c.p, eps);
    if (c.kind == "leray_lions") {
        std::function<double(double)> kappa;
        if (c.kappa.empty()) {
            kappa = [](double) { return 1.0; };
        } else {
            kappa = Expression::parse(c.kappa);
        }
        // eta is a sampled lower bound for kappa over the physical extent,
        // backed off 0.1% so the claimed coercivity constant stays valid
        // between sample points for smooth coefficients.
        const double length = dom.grid_spacing() * (dom.node_count() - 1);
        double kmin = std::numeric_limits<double>::infinity();
        for (int s = 0; s <= 4096; ++s) kmin = std::min(kmin, kappa(length * s / 4096.0));
        if (!(kmin > 0.0)) throw std::invalid_argument("leray_lions: kappa must be positive on the domain");
        auto spec = LerayLionsSpec::weighted_p_flux(c.p, kappa, eps, 0.999 * kmin);
        return std::make_unique<LerayLions1DEnergy>(std::move(dom), std::move(spec), eps);
    }
    throw std::invalid_argument("energy config: unknown kind '" + c.kind + "'");
}

// The canonical Leray-Lions description of a configured energy, used by the
// structure audit: the leray_lions spec itself, or the unit-coefficient
// p-flux matching a p_dirichlet config.
inline LerayLionsSpec structure_spec_for(const EnergyConfig& c) {
    const double eps = c.eps_reg >= 0.0 ? c.eps_reg : (c.p < 2.0 ? 1e-8 : 0.0);
    if (c.kind == "leray_lions" && !c.kappa.empty()) {
        auto kappa = Expression::parse(c.kappa);
        double kmin = std::numeric_limits<double>::infinity();
        for (int s = 0; s <= 4096; ++s) kmin = std::min(kmin, kappa(s / 4096.0));
        return LerayLionsSpec::weighted_p_flux(c.p, kappa, eps, 0.999 * kmin);
    }
    return LerayLionsSpec::weighted_p_flux(c.p, [](double) { return 1.0; }, eps, 1.0);
}

}  // namespace dnl
