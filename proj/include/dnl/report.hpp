#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dnl {

// One audited property: pass iff worst_margin >= -tolerance; a witness (the
// offending inputs) is attached whenever pass is false. Margins are exact
// evaluations, never clamped.
struct Check {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    long samples_run = 0;
    nlohmann::json witness;  // null unless pass == false

    static Check make(std::string name, double tolerance) {
        Check c;
        c.name = std::move(name);
        c.tolerance = tolerance;
        return c;
    }

    void record(double margin, const nlohmann::json& candidate_witness) {
        ++samples_run;
        if (samples_run == 1 || margin < worst_margin) {
            worst_margin = margin;
            if (margin < -tolerance) witness = candidate_witness;
        }
        if (margin < -tolerance) pass = false;
    }
};

struct AuditReport {
    nlohmann::json header;  // seed, tolerances, families, conventions
    std::vector<Check> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["header"] = header;
        j["all_passed"] = all_passed();
        auto& arr = j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json e;
            e["name"] = c.name;
            e["pass"] = c.pass;
            e["worst_margin"] = c.worst_margin;
            e["tolerance"] = c.tolerance;
            e["samples_run"] = c.samples_run;
            if (!c.pass) e["witness"] = c.witness;
            arr.push_back(std::move(e));
        }
        return j;
    }
};

}  // namespace dnl
