#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnl/domain.hpp"
#include "dnl/errors.hpp"
#include "dnl/resolvent.hpp"

namespace dnl {

// Shortest-exact decimal for doubles ("%.17g" round-trips bit-exactly and is
// locale-independent here); used for every CSV cell so artifacts are
// byte-identical across reruns.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// Graph file format: {"nodes": [mu...], "edges": [[i, j, w]...],
// "boundary": [index...]}; grid_spacing is emitted for grids so 1D energies
// can be rebuilt from file.
inline nlohmann::json domain_to_json(const DiscreteDomain& dom) {
    nlohmann::json j;
    j["nodes"] = dom.measure();
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : dom.edges()) edges.push_back({e.i, e.j, e.w});
    auto& boundary = j["boundary"] = nlohmann::json::array();
    for (int i = 0; i < dom.node_count(); ++i)
        if (dom.is_boundary(i)) boundary.push_back(i);
    if (dom.grid_spacing() > 0.0) j["grid_spacing"] = dom.grid_spacing();
    return j;
}

inline DiscreteDomain domain_from_json(const nlohmann::json& j) {
    std::vector<double> mu = j.at("nodes").get<std::vector<double>>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (e.size() != 3) throw std::invalid_argument("graph file: edges must be [i, j, w] triples");
        edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    std::vector<bool> boundary(mu.size(), false);
    for (const auto& b : j.at("boundary")) {
        const int i = b.get<int>();
        if (i < 0 || i >= static_cast<int>(mu.size()))
            throw std::invalid_argument("graph file: boundary index out of range");
        boundary[i] = true;
    }
    return DiscreteDomain(std::move(mu), std::move(edges), std::move(boundary), j.value("grid_spacing", 0.0));
}

inline NodeFunction node_function_from_json(const nlohmann::json& j) {
    return j.at("values").get<std::vector<double>>();
}

inline nlohmann::json node_function_to_json(const NodeFunction& u) { return {{"values", u}}; }

inline nlohmann::json solution_to_json(const ResolventSolution& sol) {
    nlohmann::json j;
    j["u"] = sol.u;
    j["w"] = sol.w;
    j["residual"] = sol.kkt_residual;
    j["iterations"] = sol.iterations;
    j["objective"] = sol.objective_value;
    return j;
}

// Minimal CSV table: header row plus numeric rows, all cells %.17g.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt_g17(row[c]);
            os << '\n';
        }
        return os.str();
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << to_string();
    }

    static CsvTable parse(std::istream& in) {
        CsvTable t;
        std::string line;
        if (std::getline(in, line)) {
            std::istringstream hs(line);
            std::string cell;
            while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream rs(line);
            std::string cell;
            std::vector<double> row;
            while (std::getline(rs, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
            t.rows.push_back(std::move(row));
        }
        return t;
    }
};

// FNV-1a, used for the experiment manifest's config fingerprint (stable
// across platforms, unlike std::hash).
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace dnl
