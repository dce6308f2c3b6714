#pragma once

#include "rolecycle/model.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>

namespace rolecycle {

struct JobFunction {
    std::string id;
    std::string title;
    std::string org_unit;
    std::string description;

    bool operator==(const JobFunction&) const = default;
};

/// A user's place in the business view: which unit they sit in and which job
/// function they perform. Users absent from the snapshot are outside the
/// organization.
struct OrgUserRecord {
    std::string id;
    std::optional<std::string> org_unit;
    std::optional<std::string> job_function;

    bool operator==(const OrgUserRecord&) const = default;
};

/// The organization view ingested from a JSON document: unit forest, job
/// functions, and user placements.
struct OrgSnapshot {
    std::map<std::string, OrgUnit> units;
    std::map<std::string, JobFunction> jobs;
    std::map<std::string, OrgUserRecord> users;

    bool operator==(const OrgSnapshot&) const = default;
};

inline void to_json(json& j, const JobFunction& f) {
    j = json{{"id", f.id}, {"title", f.title}, {"org_unit", f.org_unit}, {"description", f.description}};
}
inline void from_json(const json& j, JobFunction& f) {
    f.id = j.at("id").get<std::string>();
    f.title = j.at("title").get<std::string>();
    f.org_unit = j.at("org_unit").get<std::string>();
    f.description = j.value("description", std::string{});
}

inline void to_json(json& j, const OrgUserRecord& u) {
    j = json{{"id", u.id},
             {"org_unit", detail::opt_str(u.org_unit)},
             {"job_function", detail::opt_str(u.job_function)}};
}
inline void from_json(const json& j, OrgUserRecord& u) {
    u.id = j.at("id").get<std::string>();
    u.org_unit = detail::opt_str_from(j.value("org_unit", json(nullptr)));
    u.job_function = detail::opt_str_from(j.value("job_function", json(nullptr)));
}

inline void to_json(json& j, const OrgSnapshot& s) {
    json units = json::array();
    for (const auto& [id, u] : s.units) units.push_back(u);
    json jobs = json::array();
    for (const auto& [id, f] : s.jobs) jobs.push_back(f);
    json users = json::array();
    for (const auto& [id, u] : s.users) users.push_back(u);
    j = json{{"org_units", units}, {"job_functions", jobs}, {"users", users}};
}

/// Parse and validate an org document: parent links must form a forest, job
/// functions and user placements must reference known units/jobs.
inline OrgSnapshot org_snapshot_from_json(const json& j) {
    OrgSnapshot snap;
    for (const auto& e : j.value("org_units", json::array())) {
        OrgUnit u = e.get<OrgUnit>();
        if (snap.units.count(u.id)) throw Error(ErrorCode::duplicate_id, "org unit " + u.id);
        snap.units.emplace(u.id, std::move(u));
    }
    for (const auto& [id, u] : snap.units) {
        if (u.parent && !snap.units.count(*u.parent)) {
            throw Error(ErrorCode::dangling_reference, "org unit " + id + " parent " + *u.parent);
        }
    }
    // walk parent chains; revisiting a node on the current chain is a cycle
    for (const auto& [id, u] : snap.units) {
        std::set<std::string> chain;
        const OrgUnit* cur = &u;
        chain.insert(id);
        while (cur->parent) {
            if (!chain.insert(*cur->parent).second) {
                throw Error(ErrorCode::cyclic_org_structure, "cycle through org unit " + *cur->parent);
            }
            cur = &snap.units.at(*cur->parent);
        }
    }
    for (const auto& e : j.value("job_functions", json::array())) {
        JobFunction f = e.get<JobFunction>();
        if (!snap.units.count(f.org_unit)) {
            throw Error(ErrorCode::dangling_reference, "job function " + f.id + " org unit " + f.org_unit);
        }
        snap.jobs.emplace(f.id, std::move(f));
    }
    for (const auto& e : j.value("users", json::array())) {
        OrgUserRecord u = e.get<OrgUserRecord>();
        if (u.org_unit && !snap.units.count(*u.org_unit)) {
            throw Error(ErrorCode::dangling_reference, "user " + u.id + " org unit " + *u.org_unit);
        }
        if (u.job_function && !snap.jobs.count(*u.job_function)) {
            throw Error(ErrorCode::dangling_reference, "user " + u.id + " job function " + *u.job_function);
        }
        snap.users.emplace(u.id, std::move(u));
    }
    return snap;
}

/// Unit ids in the subtree rooted at `root` (inclusive).
inline std::set<std::string> subtree_units(const OrgSnapshot& snap, const std::string& root) {
    std::set<std::string> out;
    if (!snap.units.count(root)) return out;
    out.insert(root);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [id, u] : snap.units) {
            if (u.parent && out.count(*u.parent) && out.insert(id).second) grew = true;
        }
    }
    return out;
}

}  // namespace rolecycle
