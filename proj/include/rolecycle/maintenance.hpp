#pragma once

#include "rolecycle/management.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

// ---------------------------------------------------------------------------
// Usage evidence
// ---------------------------------------------------------------------------

struct UsageRecord {
    std::string user;
    std::string permission;
    std::int64_t ts = 0;
};

inline void to_json(json& j, const UsageRecord& r) {
    j = json{{"user", r.user}, {"permission", r.permission}, {"ts", r.ts}};
}
inline void from_json(const json& j, UsageRecord& r) {
    r.user = j.at("user").get<std::string>();
    r.permission = j.at("permission").get<std::string>();
    r.ts = j.at("ts").get<std::int64_t>();
}

/// Newline-delimited JSON records; timestamps must be non-decreasing within a
/// file.
inline std::vector<UsageRecord> parse_usage_log(std::istream& in) {
    std::vector<UsageRecord> out;
    std::string line;
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::input_error, "bad usage record on line " + std::to_string(line_no));
        }
        UsageRecord r = j.get<UsageRecord>();
        if (r.ts < last) {
            throw Error(ErrorCode::input_error,
                        "usage timestamps decrease on line " + std::to_string(line_no));
        }
        last = r.ts;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deviations
// ---------------------------------------------------------------------------

enum class DeviationKind {
    definition_drift,
    duplicate_role,
    missing_role,
    orphaned_assignment,
    sod_violation,
    unauthorized_grant,
    unauthorized_role,
    unused_role,
};

inline std::string to_string(DeviationKind k) {
    switch (k) {
        case DeviationKind::definition_drift: return "definition_drift";
        case DeviationKind::duplicate_role: return "duplicate_role";
        case DeviationKind::missing_role: return "missing_role";
        case DeviationKind::orphaned_assignment: return "orphaned_assignment";
        case DeviationKind::sod_violation: return "sod_violation";
        case DeviationKind::unauthorized_grant: return "unauthorized_grant";
        case DeviationKind::unauthorized_role: return "unauthorized_role";
        case DeviationKind::unused_role: return "unused_role";
    }
    return "definition_drift";
}

inline DeviationKind deviation_kind_from_string(const std::string& s) {
    if (s == "definition_drift") return DeviationKind::definition_drift;
    if (s == "duplicate_role") return DeviationKind::duplicate_role;
    if (s == "missing_role") return DeviationKind::missing_role;
    if (s == "orphaned_assignment") return DeviationKind::orphaned_assignment;
    if (s == "sod_violation") return DeviationKind::sod_violation;
    if (s == "unauthorized_grant") return DeviationKind::unauthorized_grant;
    if (s == "unauthorized_role") return DeviationKind::unauthorized_role;
    if (s == "unused_role") return DeviationKind::unused_role;
    throw Error(ErrorCode::input_error, "bad deviation kind: " + s);
}

enum class Severity { info, warning, critical };

inline std::string to_string(Severity s) {
    switch (s) {
        case Severity::info: return "info";
        case Severity::warning: return "warning";
        case Severity::critical: return "critical";
    }
    return "info";
}

inline Severity severity_from_string(const std::string& s) {
    if (s == "info") return Severity::info;
    if (s == "warning") return Severity::warning;
    if (s == "critical") return Severity::critical;
    throw Error(ErrorCode::input_error, "bad severity: " + s);
}

enum class RouteKind { re_analyze, re_define, update_catalogue, administrative_fix };

inline std::string to_string(RouteKind r) {
    switch (r) {
        case RouteKind::re_analyze: return "re_analyze";
        case RouteKind::re_define: return "re_define";
        case RouteKind::update_catalogue: return "update_catalogue";
        case RouteKind::administrative_fix: return "administrative_fix";
    }
    return "re_analyze";
}

inline RouteKind route_from_string(const std::string& s) {
    if (s == "re_analyze") return RouteKind::re_analyze;
    if (s == "re_define") return RouteKind::re_define;
    if (s == "update_catalogue") return RouteKind::update_catalogue;
    if (s == "administrative_fix") return RouteKind::administrative_fix;
    throw Error(ErrorCode::input_error, "bad route: " + s);
}

// Severities and routes are fixed per kind so report goldens stay stable.
inline Severity severity_of(DeviationKind k) {
    switch (k) {
        case DeviationKind::sod_violation:
        case DeviationKind::unauthorized_grant:
            return Severity::critical;
        case DeviationKind::unauthorized_role:
        case DeviationKind::definition_drift:
        case DeviationKind::missing_role:
            return Severity::warning;
        default:
            return Severity::info;
    }
}

inline RouteKind route_of(DeviationKind k) {
    switch (k) {
        case DeviationKind::unauthorized_role:
        case DeviationKind::unauthorized_grant:
        case DeviationKind::orphaned_assignment:
            return RouteKind::administrative_fix;
        case DeviationKind::missing_role:
        case DeviationKind::definition_drift:
            return RouteKind::update_catalogue;
        case DeviationKind::duplicate_role:
        case DeviationKind::sod_violation:
            return RouteKind::re_define;
        case DeviationKind::unused_role:
            return RouteKind::re_analyze;
    }
    return RouteKind::re_analyze;
}

struct Deviation {
    DeviationKind kind = DeviationKind::definition_drift;
    Severity severity = Severity::info;
    std::string subject;                // primary subject id, used for ordering
    std::vector<std::string> subjects;  // all involved ids
    json evidence;
    RouteKind route = RouteKind::re_analyze;
};

inline void to_json(json& j, const Deviation& d) {
    j = json{{"kind", to_string(d.kind)},
             {"severity", to_string(d.severity)},
             {"subject", d.subject},
             {"subjects", d.subjects},
             {"evidence", d.evidence},
             {"recommended_route", to_string(d.route)}};
}
inline void from_json(const json& j, Deviation& d) {
    d.kind = deviation_kind_from_string(j.at("kind").get<std::string>());
    d.severity = severity_from_string(j.at("severity").get<std::string>());
    d.subject = j.at("subject").get<std::string>();
    d.subjects = j.at("subjects").get<std::vector<std::string>>();
    d.evidence = j.at("evidence");
    d.route = route_from_string(j.at("recommended_route").get<std::string>());
}

enum class TriggerKind { periodic, event };

inline std::string to_string(TriggerKind t) { return t == TriggerKind::periodic ? "periodic" : "event"; }
inline TriggerKind trigger_from_string(const std::string& s) {
    if (s == "periodic") return TriggerKind::periodic;
    if (s == "event") return TriggerKind::event;
    throw Error(ErrorCode::input_error, "bad trigger: " + s);
}

struct MaintenanceReport {
    TriggerKind trigger = TriggerKind::periodic;
    std::string environment;
    int roles_catalogue_version = 0;
    int concept_catalogue_version = 0;
    std::vector<Deviation> deviations;
    std::int64_t timestamp = 0;

    bool has_at_or_above(Severity s) const {
        return std::any_of(deviations.begin(), deviations.end(),
                           [&](const Deviation& d) { return static_cast<int>(d.severity) >= static_cast<int>(s); });
    }
};

inline void to_json(json& j, const MaintenanceReport& r) {
    j = json{{"trigger", to_string(r.trigger)},
             {"environment", r.environment},
             {"roles_catalogue_version", r.roles_catalogue_version},
             {"concept_catalogue_version", r.concept_catalogue_version},
             {"deviations", r.deviations},
             {"timestamp", r.timestamp}};
}
inline void from_json(const json& j, MaintenanceReport& r) {
    r.trigger = trigger_from_string(j.at("trigger").get<std::string>());
    r.environment = j.at("environment").get<std::string>();
    r.roles_catalogue_version = j.at("roles_catalogue_version").get<int>();
    r.concept_catalogue_version = j.at("concept_catalogue_version").get<int>();
    r.deviations = j.at("deviations").get<std::vector<Deviation>>();
    r.timestamp = j.at("timestamp").get<std::int64_t>();
}

struct MaintenanceParams {
    std::int64_t unused_window_secs = 7776000;  // 90 days
    std::optional<std::int64_t> since;          // drop usage records older than this
};

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

inline MaintenanceReport detect_deviations(const Environment& env, const RolesCatalogue& catalogue,
                                           const ConceptCatalogue& concepts, const OrgSnapshot& org,
                                           const std::vector<UsageRecord>* usage,
                                           const MaintenanceParams& params, TriggerKind trigger,
                                           std::int64_t now) {
    const DirectoryState& s = env.state;
    MaintenanceReport report;
    report.trigger = trigger;
    report.environment = env.name;
    report.roles_catalogue_version = catalogue.version;
    for (const auto& [id, versions] : concepts) {
        for (const auto& [v, entry] : versions) {
            report.concept_catalogue_version = std::max(report.concept_catalogue_version, v);
        }
    }
    report.timestamp = now;
    auto& out = report.deviations;

    // unauthorized_role: deployed active roles the catalogue does not know,
    // seeded admin roles exempt
    for (const auto& [rid, role] : s.roles) {
        if (role.status != RoleStatus::active) continue;
        if (is_seeded_admin_role(rid) || catalogue.entries.count(rid)) continue;
        Deviation d;
        d.kind = DeviationKind::unauthorized_role;
        d.subject = rid;
        d.subjects = {rid};
        d.evidence = json{{"role", role}};
        out.push_back(std::move(d));
    }

    // per catalogued role: missing / drifted / extra grants
    for (const auto& [rid, entry] : catalogue.entries) {
        auto rit = s.roles.find(rid);
        if (entry.role.status == RoleStatus::archived) {
            if (rit != s.roles.end() && rit->second.status == RoleStatus::active) {
                Deviation d;
                d.kind = DeviationKind::definition_drift;
                d.subject = rid;
                d.subjects = {rid};
                d.evidence = json{{"status", json{{"deployed", "active"}, {"catalogued", "archived"}}}};
                out.push_back(std::move(d));
            }
            continue;
        }
        if (rit == s.roles.end()) {
            Deviation d;
            d.kind = DeviationKind::missing_role;
            d.subject = rid;
            d.subjects = {rid};
            d.evidence = json{{"entry", entry}};
            out.push_back(std::move(d));
            continue;
        }

        json drift = json::object();
        if (!(rit->second == entry.role)) {
            drift["role"] = json{{"deployed", rit->second}, {"catalogued", entry.role}};
        }
        auto env_grants = detail::grants_on_role(s, rid);
        std::set<std::string> bundle_ids;
        json changed = json::array();
        json missing = json::array();
        for (const auto& g : entry.grants) {
            bundle_ids.insert(g.id);
            auto git = env_grants.find(g.id);
            if (git == env_grants.end()) {
                missing.push_back(g.id);
            } else if (!detail::grant_matches(s, git->second, entry, g)) {
                changed.push_back(g.id);
            }
        }
        if (!changed.empty() || !missing.empty()) {
            drift["grants"] = json{{"changed", changed}, {"missing", missing}};
        }
        for (const auto& [gid, g] : env_grants) {
            if (bundle_ids.count(gid)) continue;
            Deviation d;
            d.kind = DeviationKind::unauthorized_grant;
            d.subject = gid;
            d.subjects = {gid, rid};
            d.evidence = json{{"grant", g}, {"role", rid}};
            out.push_back(std::move(d));
        }
        // edges attributed to the senior side to avoid double-reporting
        std::set<std::pair<std::string, std::string>> entry_edges;
        for (const auto& e : entry.edges) {
            if (e.first == rid) entry_edges.insert(e);
        }
        std::set<std::pair<std::string, std::string>> env_edges;
        for (const auto& e : s.hierarchy) {
            if (e.first == rid && catalogue.entries.count(e.second)) env_edges.insert(e);
        }
        if (entry_edges != env_edges) {
            json extra = json::array();
            json absent = json::array();
            for (const auto& e : env_edges) {
                if (!entry_edges.count(e)) extra.push_back(detail::edge_subject(e));
            }
            for (const auto& e : entry_edges) {
                if (!env_edges.count(e)) absent.push_back(detail::edge_subject(e));
            }
            drift["edges"] = json{{"extra", extra}, {"missing", absent}};
        }
        if (!drift.empty()) {
            Deviation d;
            d.kind = DeviationKind::definition_drift;
            d.subject = rid;
            d.subjects = {rid};
            d.evidence = std::move(drift);
            out.push_back(std::move(d));
        }
    }

    // duplicate_role: identical non-empty effective closures among active roles
    {
        std::map<std::set<std::string>, std::vector<std::string>> by_closure;
        for (const auto& [rid, role] : s.roles) {
            if (role.status != RoleStatus::active) continue;
            auto closure = effective_permissions(s, rid);
            if (closure.empty()) continue;
            by_closure[std::move(closure)].push_back(rid);
        }
        for (const auto& [closure, roles] : by_closure) {
            if (roles.size() < 2) continue;
            Deviation d;
            d.kind = DeviationKind::duplicate_role;
            std::string joined;
            for (const auto& r : roles) joined += (joined.empty() ? "" : "+") + r;
            d.subject = joined;
            d.subjects = roles;
            d.evidence = json{{"roles", roles}, {"closure", closure}};
            out.push_back(std::move(d));
        }
    }

    // unused_role
    {
        std::vector<UsageRecord> window_records;
        std::int64_t max_ts = 0;
        if (usage) {
            for (const auto& r : *usage) {
                if (params.since && r.ts < *params.since) continue;
                window_records.push_back(r);
                max_ts = std::max(max_ts, r.ts);
            }
        }
        for (const auto& [rid, role] : s.roles) {
            if (role.status != RoleStatus::active || is_seeded_admin_role(rid)) continue;
            auto members = detail::active_members(s, rid);
            if (members.empty()) {
                Deviation d;
                d.kind = DeviationKind::unused_role;
                d.subject = rid;
                d.subjects = {rid};
                d.evidence = json{{"reason", "no members"}};
                out.push_back(std::move(d));
                continue;
            }
            if (!usage) continue;
            auto closure = effective_permissions(s, rid);
            bool used = false;
            for (const auto& r : window_records) {
                if (r.ts + params.unused_window_secs >= max_ts && closure.count(r.permission)) {
                    used = true;
                    break;
                }
            }
            if (!used) {
                Deviation d;
                d.kind = DeviationKind::unused_role;
                d.subject = rid;
                d.subjects = {rid};
                d.evidence = json{{"reason", "no usage in window"},
                                  {"window_secs", params.unused_window_secs},
                                  {"log_max_ts", max_ts}};
                out.push_back(std::move(d));
            }
        }
    }

    // orphaned_assignment: holder no longer in the organization
    for (const auto& [key, a] : s.assignments) {
        if (!a.active) continue;
        if (org.users.count(a.user)) continue;
        Deviation d;
        d.kind = DeviationKind::orphaned_assignment;
        d.subject = a.user + "->" + a.role;
        d.subjects = {a.user, a.role};
        d.evidence = json{{"user", a.user}, {"role", a.role}};
        out.push_back(std::move(d));
    }

    // sod_violation pass-through
    for (const auto& v : audit_sod(s)) {
        Deviation d;
        d.kind = DeviationKind::sod_violation;
        d.subject = v.rule + ":" + v.user;
        d.subjects = {v.rule, v.user};
        d.evidence = json(v);
        out.push_back(std::move(d));
    }

    for (auto& d : out) {
        d.severity = severity_of(d.kind);
        d.route = route_of(d.kind);
    }
    std::sort(out.begin(), out.end(), [](const Deviation& a, const Deviation& b) {
        return std::make_tuple(-static_cast<int>(a.severity), to_string(a.kind), a.subject) <
               std::make_tuple(-static_cast<int>(b.severity), to_string(b.kind), b.subject);
    });
    return report;
}

// ---------------------------------------------------------------------------
// Re-definition planning
// ---------------------------------------------------------------------------

struct RedefinitionTask {
    std::string id;
    DeviationKind deviation_kind = DeviationKind::definition_drift;
    std::string deviation_subject;
    RouteKind route = RouteKind::re_analyze;
    json payload;
};

inline void to_json(json& j, const RedefinitionTask& t) {
    j = json{{"id", t.id},
             {"deviation_kind", to_string(t.deviation_kind)},
             {"deviation_subject", t.deviation_subject},
             {"route", to_string(t.route)},
             {"payload", t.payload}};
}

namespace detail {

inline RoleDesign design_from_catalogue_entry(const CatalogueEntry& entry) {
    RoleDesign d;
    d.role = entry.role;
    d.role.status = RoleStatus::active;
    d.permissions = entry.permissions;
    for (const auto& g : entry.grants) {
        if (g.id == designed_grant_id(entry.role.id)) continue;
        d.extra_grants.push_back(g);
        auto ps = entry.permission_sets.find(g.permission_set);
        if (ps != entry.permission_sets.end()) d.extra_permission_sets[ps->first] = ps->second;
    }
    d.edges = entry.edges;
    return d;
}

/// Draft fork of a role for engineering review. Continues the role's concept
/// entry when one exists, otherwise starts a fresh version 1 draft from the
/// catalogue definition.
inline json draft_fork_payload(const std::string& role_id, const RolesCatalogue& catalogue,
                               const ConceptCatalogue& concepts, const std::string& note) {
    ConceptEntry draft;
    const ConceptEntry* existing = nullptr;
    for (const auto& [id, versions] : concepts) {
        for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
            if (it->second.design.role.id == role_id) {
                existing = &it->second;
                break;
            }
        }
        if (existing) break;
    }
    if (existing) {
        draft = *existing;
        draft.version = existing->version + 1;
    } else {
        draft.id = role_id;
        draft.version = 1;
        auto cit = catalogue.entries.find(role_id);
        if (cit != catalogue.entries.end()) {
            draft.design = design_from_catalogue_entry(cit->second);
            draft.sod_tags = cit->second.sod_tags;
        } else {
            draft.design.role = Role{role_id, role_id, "general", {}, {}, RoleStatus::active};
        }
    }
    draft.status = ConceptStatus::draft;
    return json{{"draft", draft}, {"note", note}};
}

}  // namespace detail

/// One task per deviation, along the fixed route table. Tasks are proposals;
/// nothing is applied automatically.
inline std::vector<RedefinitionTask> plan_redefinition(const MaintenanceReport& report,
                                                       const RolesCatalogue& catalogue,
                                                       const ConceptCatalogue& concepts) {
    std::vector<RedefinitionTask> tasks;
    int seq = 0;
    for (const auto& d : report.deviations) {
        RedefinitionTask t;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "task-%04d", ++seq);
        t.id = buf;
        t.deviation_kind = d.kind;
        t.deviation_subject = d.subject;
        t.route = d.route;
        switch (d.kind) {
            case DeviationKind::unauthorized_role:
                t.payload = json{{"changes", json::array({json{{"kind", "archive_role"},
                                                               {"subject", d.subject}}})}};
                break;
            case DeviationKind::unauthorized_grant:
                t.payload = json{{"changes", json::array({json{{"kind", "remove_grant"},
                                                               {"subject", d.subject}}})}};
                break;
            case DeviationKind::orphaned_assignment:
                t.payload = json{{"changes",
                                  json::array({json{{"kind", "revoke_assignment"},
                                                    {"user", d.evidence.at("user")},
                                                    {"role", d.evidence.at("role")}}})}};
                break;
            case DeviationKind::missing_role: {
                json change{{"kind", "create_role"}, {"subject", d.subject}};
                auto it = catalogue.entries.find(d.subject);
                if (it != catalogue.entries.end()) change["entry"] = it->second;
                t.payload = json{{"changes", json::array({std::move(change)})}};
                break;
            }
            case DeviationKind::definition_drift: {
                json change{{"kind", "update_role"}, {"subject", d.subject}};
                auto it = catalogue.entries.find(d.subject);
                if (it != catalogue.entries.end()) change["entry"] = it->second;
                t.payload = json{{"changes", json::array({std::move(change)})}};
                break;
            }
            case DeviationKind::duplicate_role:
                t.payload = detail::draft_fork_payload(
                    d.subjects.front(), catalogue, concepts,
                    "review duplicate closure group " + d.subject + " for a merge");
                break;
            case DeviationKind::sod_violation: {
                std::string role = d.subjects.size() > 1 ? d.subjects[1] : d.subject;
                // fork the first role reachable in the violation evidence
                if (d.evidence.contains("via") && !d.evidence["via"].empty()) {
                    std::string via = d.evidence["via"].front().get<std::string>();
                    if (via.rfind("assignment:", 0) == 0) role = via.substr(11);
                }
                t.payload = detail::draft_fork_payload(role, catalogue, concepts,
                                                       "resolve segregation-of-duties conflict " +
                                                           d.subject);
                break;
            }
            case DeviationKind::unused_role:
                t.payload = json{{"analysis_request",
                                  json{{"reason", "role " + d.subject + " appears unused"},
                                       {"subjects", d.subjects}}}};
                break;
        }
        tasks.push_back(std::move(t));
    }
    return tasks;
}

}  // namespace rolecycle
