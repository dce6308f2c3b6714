#pragma once

#include "rolecycle/engineering.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

struct Environment {
    std::string name;
    DirectoryState state;
    int catalogue_version = 0;  // last applied roles-catalogue version

    bool operator==(const Environment&) const = default;
};

inline void to_json(json& j, const Environment& e) {
    j = json{{"name", e.name}, {"catalogue_version", e.catalogue_version}, {"state", e.state}};
}
inline void from_json(const json& j, Environment& e) {
    e.name = j.at("name").get<std::string>();
    e.catalogue_version = j.at("catalogue_version").get<int>();
    e.state = j.at("state").get<DirectoryState>();
}

inline Environment seed_environment(const std::string& name) {
    return Environment{name, seed_directory(), 0};
}

inline std::string environment_digest(const Environment& e) {
    return canonical_digest(json(e));
}

// ---------------------------------------------------------------------------
// Roles catalogue
// ---------------------------------------------------------------------------

/// A deployable role definition: the role, its designed permission surface
/// realized as concrete permission sets and grants, hierarchy edges, and the
/// definitions of every permission and instance set it references so an
/// empty environment can materialize it.
struct CatalogueEntry {
    Role role;
    std::set<std::string> permissions;
    std::map<std::string, Permission> permission_defs;
    std::map<std::string, PermissionSet> permission_sets;
    std::map<std::string, ObjectInstanceSet> instance_sets;
    std::vector<Grant> grants;  // sorted by id
    std::set<std::pair<std::string, std::string>> edges;
    std::set<std::string> sod_tags;
    std::string source;  // "concept:<id>@<version>" or "admin:split:..."/"admin:merge:..."

    bool operator==(const CatalogueEntry&) const = default;
};

struct RolesCatalogue {
    int version = 0;
    std::map<std::string, CatalogueEntry> entries;  // keyed by role id

    bool operator==(const RolesCatalogue&) const = default;
};

inline void to_json(json& j, const CatalogueEntry& e) {
    json edges = json::array();
    for (const auto& [senior, junior] : e.edges) {
        edges.push_back(json{{"senior", senior}, {"junior", junior}});
    }
    j = json{{"role", e.role},
             {"permissions", e.permissions},
             {"permission_defs", e.permission_defs},
             {"permission_sets", e.permission_sets},
             {"instance_sets", e.instance_sets},
             {"grants", e.grants},
             {"edges", edges},
             {"sod_tags", e.sod_tags},
             {"source", e.source}};
}
inline void from_json(const json& j, CatalogueEntry& e) {
    e.role = j.at("role").get<Role>();
    e.permissions = j.at("permissions").get<std::set<std::string>>();
    e.permission_defs = j.at("permission_defs").get<std::map<std::string, Permission>>();
    e.permission_sets = j.at("permission_sets").get<std::map<std::string, PermissionSet>>();
    e.instance_sets = j.at("instance_sets").get<std::map<std::string, ObjectInstanceSet>>();
    e.grants = j.at("grants").get<std::vector<Grant>>();
    e.edges.clear();
    for (const auto& edge : j.at("edges")) {
        e.edges.emplace(edge.at("senior").get<std::string>(), edge.at("junior").get<std::string>());
    }
    e.sod_tags = j.at("sod_tags").get<std::set<std::string>>();
    e.source = j.at("source").get<std::string>();
}

inline json roles_catalogue_body(const RolesCatalogue& c) {
    return json{{"entries", c.entries}};
}
inline RolesCatalogue roles_catalogue_from_body(const json& body, int version) {
    RolesCatalogue c;
    c.version = version;
    c.entries = body.at("entries").get<std::map<std::string, CatalogueEntry>>();
    return c;
}

namespace detail {

/// Capture permission / instance-set definitions for everything a design
/// references, from the state it was designed against.
inline CatalogueEntry materialize_entry(const RoleDesign& design, const std::set<std::string>& sod_tags,
                                        const std::string& source, const DirectoryState& reference) {
    CatalogueEntry e;
    e.role = design.role;
    e.role.status = RoleStatus::active;
    e.permissions = design.permissions;
    e.permission_sets[designed_permission_set_id(design.role.id)] =
        PermissionSet{designed_permission_set_id(design.role.id), design.permissions};
    for (const auto& [id, ps] : design.extra_permission_sets) e.permission_sets[id] = ps;
    e.grants.push_back(Grant{designed_grant_id(design.role.id),
                             Grantee{GranteeKind::role, design.role.id},
                             designed_permission_set_id(design.role.id), std::nullopt});
    for (const auto& g : design.extra_grants) e.grants.push_back(g);
    std::sort(e.grants.begin(), e.grants.end(),
              [](const Grant& a, const Grant& b) { return a.id < b.id; });
    for (const auto& [id, ps] : e.permission_sets) {
        for (const auto& p : ps.members) {
            auto it = reference.permissions.find(p);
            if (it == reference.permissions.end()) {
                throw Error(ErrorCode::dangling_reference, "permission " + p);
            }
            e.permission_defs[p] = it->second;
        }
    }
    for (const auto& g : e.grants) {
        if (g.instance_set) {
            auto it = reference.object_instance_sets.find(*g.instance_set);
            if (it == reference.object_instance_sets.end()) {
                throw Error(ErrorCode::dangling_reference, "object instance set " + *g.instance_set);
            }
            e.instance_sets[*g.instance_set] = it->second;
        }
    }
    e.edges = design.edges;
    e.sod_tags = sod_tags;
    e.source = source;
    return e;
}

}  // namespace detail

/// Fold the latest signed-off version of every concept entry into the
/// catalogue, superseding previous definitions of the same role id.
/// Administrative split/merge entries already present are preserved unless a
/// concept re-definition takes the role id over.
inline RolesCatalogue update_catalogue_from_concepts(RolesCatalogue catalogue,
                                                     const ConceptCatalogue& concepts,
                                                     const DirectoryState& reference) {
    for (const auto& [id, versions] : concepts) {
        const ConceptEntry* best = nullptr;
        for (const auto& [v, entry] : versions) {
            if (entry.status == ConceptStatus::signed_off) best = &entry;
        }
        if (!best) continue;
        std::string source = "concept:" + best->id + "@" + std::to_string(best->version);
        catalogue.entries[best->design.role.id] =
            detail::materialize_entry(best->design, best->sod_tags, source, reference);
    }
    for (const auto& [rid, entry] : catalogue.entries) {
        for (const auto& [senior, junior] : entry.edges) {
            if (!catalogue.entries.count(senior) || !catalogue.entries.count(junior)) {
                throw Error(ErrorCode::dangling_reference,
                            "catalogue edge " + senior + " -> " + junior +
                                " references a role outside the catalogue");
            }
        }
    }
    return catalogue;
}

// ---------------------------------------------------------------------------
// Deployment bundles
// ---------------------------------------------------------------------------

struct DeploymentBundle {
    int format_version = 1;
    int source_version = 0;
    std::string digest;  // sha256 of the canonical body
    json body;           // {"entries": {...}}
};

inline DeploymentBundle export_bundle(const RolesCatalogue& catalogue) {
    if (catalogue.entries.empty()) {
        throw Error(ErrorCode::empty_catalogue, "roles catalogue has no entries to export");
    }
    DeploymentBundle b;
    b.source_version = catalogue.version;
    b.body = roles_catalogue_body(catalogue);
    b.digest = canonical_digest(b.body);
    return b;
}

inline json bundle_to_json(const DeploymentBundle& b) {
    return json{{"body", b.body},
                {"header",
                 json{{"format_version", b.format_version},
                      {"source_version", b.source_version},
                      {"digest", b.digest}}}};
}
inline DeploymentBundle bundle_from_json(const json& j) {
    DeploymentBundle b;
    b.body = j.at("body");
    b.format_version = j.at("header").at("format_version").get<int>();
    b.source_version = j.at("header").at("source_version").get<int>();
    b.digest = j.at("header").at("digest").get<std::string>();
    return b;
}

inline void verify_bundle(const DeploymentBundle& b) {
    if (canonical_digest(b.body) != b.digest) {
        throw Error(ErrorCode::digest_mismatch, "deployment bundle digest does not match its content");
    }
}

// ---------------------------------------------------------------------------
// ChangeSets
// ---------------------------------------------------------------------------

enum class ChangeKind { create_role, update_role, archive_role, create_grant, remove_grant, add_edge, remove_edge };

inline std::string to_string(ChangeKind k) {
    switch (k) {
        case ChangeKind::create_role: return "create_role";
        case ChangeKind::update_role: return "update_role";
        case ChangeKind::archive_role: return "archive_role";
        case ChangeKind::create_grant: return "create_grant";
        case ChangeKind::remove_grant: return "remove_grant";
        case ChangeKind::add_edge: return "add_edge";
        case ChangeKind::remove_edge: return "remove_edge";
    }
    return "create_role";
}

struct Change {
    ChangeKind kind = ChangeKind::create_role;
    std::string subject;
    json before;
    json after;
};

using ChangeSet = std::vector<Change>;

inline void to_json(json& j, const Change& c) {
    j = json{{"kind", to_string(c.kind)}, {"subject", c.subject}, {"before", c.before}, {"after", c.after}};
}

namespace detail {

inline std::map<std::string, Grant> grants_on_role(const DirectoryState& s, const std::string& role_id) {
    std::map<std::string, Grant> out;
    for (const auto& [gid, g] : s.grants) {
        if (g.grantee.kind == GranteeKind::role && g.grantee.id == role_id) out.emplace(gid, g);
    }
    return out;
}

inline bool grant_matches(const DirectoryState& env, const Grant& env_grant, const CatalogueEntry& entry,
                          const Grant& bundle_grant) {
    if (!(env_grant == bundle_grant)) return false;
    auto env_ps = env.permission_sets.find(env_grant.permission_set);
    auto bundle_ps = entry.permission_sets.find(bundle_grant.permission_set);
    if (bundle_ps == entry.permission_sets.end()) return env_ps == env.permission_sets.end();
    return env_ps != env.permission_sets.end() && env_ps->second.members == bundle_ps->second.members;
}

/// Snapshot of how a catalogued role currently looks in an environment, for
/// update_role's `before` payload.
inline json role_snapshot(const DirectoryState& s, const std::string& role_id) {
    json grants = json::array();
    json sets = json::object();
    for (const auto& [gid, g] : grants_on_role(s, role_id)) {
        grants.push_back(g);
        auto ps = s.permission_sets.find(g.permission_set);
        if (ps != s.permission_sets.end()) sets[ps->first] = ps->second;
    }
    return json{{"role", s.roles.at(role_id)}, {"grants", grants}, {"permission_sets", sets}};
}

inline int change_bucket(ChangeKind k) {
    switch (k) {
        case ChangeKind::create_role: return 0;
        case ChangeKind::create_grant: return 1;
        case ChangeKind::add_edge: return 2;
        case ChangeKind::update_role: return 3;
        case ChangeKind::archive_role: return 4;
        case ChangeKind::remove_grant: return 5;
        case ChangeKind::remove_edge: return 6;
    }
    return 0;
}

inline std::string edge_subject(const std::pair<std::string, std::string>& e) {
    return e.first + "->" + e.second;
}

}  // namespace detail

/// Minimal atomic changes making the environment's catalogued-role subset
/// match the bundle. Environment-local entities stay untouched: diff scopes
/// to catalogued role ids, their grants, and edges between catalogued roles.
/// Ordering is deterministic: creates, then updates, then archives/removals,
/// lexicographic by subject within each kind.
inline ChangeSet diff(const DeploymentBundle& bundle, const Environment& env) {
    verify_bundle(bundle);
    auto entries = bundle.body.at("entries").get<std::map<std::string, CatalogueEntry>>();
    const DirectoryState& s = env.state;
    ChangeSet changes;
    std::set<std::string> creating;

    for (const auto& [rid, entry] : entries) {
        auto rit = s.roles.find(rid);
        if (entry.role.status == RoleStatus::archived) {
            if (rit != s.roles.end() && rit->second.status == RoleStatus::active) {
                Role archived = rit->second;
                archived.status = RoleStatus::archived;
                changes.push_back({ChangeKind::archive_role, rid, json(rit->second), json(archived)});
            }
            continue;
        }
        if (rit == s.roles.end()) {
            creating.insert(rid);
            changes.push_back({ChangeKind::create_role, rid, json(nullptr), json(entry)});
            continue;
        }
        bool needs_update = !(rit->second == entry.role);
        auto env_grants = detail::grants_on_role(s, rid);
        std::set<std::string> bundle_grant_ids;
        for (const auto& g : entry.grants) {
            bundle_grant_ids.insert(g.id);
            auto git = env_grants.find(g.id);
            if (git == env_grants.end()) {
                json payload{{"grant", g}, {"entry_role", rid}};
                changes.push_back({ChangeKind::create_grant, g.id, json(nullptr), std::move(payload)});
            } else if (!detail::grant_matches(s, git->second, entry, g)) {
                needs_update = true;
            }
        }
        for (const auto& [gid, g] : env_grants) {
            if (!bundle_grant_ids.count(gid)) {
                changes.push_back({ChangeKind::remove_grant, gid, json(g), json(nullptr)});
            }
        }
        if (needs_update) {
            changes.push_back(
                {ChangeKind::update_role, rid, detail::role_snapshot(s, rid), json(entry)});
        }
    }

    // Edges between catalogued roles; edges of roles being created ride along
    // inside their create_role change.
    std::set<std::pair<std::string, std::string>> bundle_edges;
    for (const auto& [rid, entry] : entries) {
        if (entry.role.status != RoleStatus::active) continue;
        for (const auto& e : entry.edges) bundle_edges.insert(e);
    }
    std::set<std::pair<std::string, std::string>> env_edges;
    for (const auto& e : s.hierarchy) {
        if (entries.count(e.first) && entries.count(e.second)) env_edges.insert(e);
    }
    for (const auto& e : bundle_edges) {
        if (creating.count(e.first) || creating.count(e.second)) continue;
        if (!env_edges.count(e)) {
            changes.push_back({ChangeKind::add_edge, detail::edge_subject(e), json(nullptr),
                               json{{"senior", e.first}, {"junior", e.second}}});
        }
    }
    for (const auto& e : env_edges) {
        if (!bundle_edges.count(e)) {
            changes.push_back({ChangeKind::remove_edge, detail::edge_subject(e),
                               json{{"senior", e.first}, {"junior", e.second}}, json(nullptr)});
        }
    }

    std::sort(changes.begin(), changes.end(), [](const Change& a, const Change& b) {
        return std::make_pair(detail::change_bucket(a.kind), a.subject) <
               std::make_pair(detail::change_bucket(b.kind), b.subject);
    });
    return changes;
}

struct ApplyResult {
    Environment environment;
    ChangeSet applied;
};

namespace detail {

inline DirectoryState materialize_defs(DirectoryState s, const CatalogueEntry& entry) {
    for (const auto& [pid, def] : entry.permission_defs) {
        if (!s.permissions.count(pid)) s = add_permission(std::move(s), def);
    }
    for (const auto& [oid, def] : entry.instance_sets) {
        if (!s.object_instance_sets.count(oid)) s = add_object_instance_set(std::move(s), def);
    }
    return s;
}

inline DirectoryState upsert_entry_grants(DirectoryState s, const CatalogueEntry& entry) {
    for (const auto& [psid, ps] : entry.permission_sets) {
        if (s.permission_sets.count(psid)) {
            s.permission_sets[psid] = ps;
        } else {
            s = add_permission_set(std::move(s), ps);
        }
    }
    for (const auto& g : entry.grants) {
        if (s.grants.count(g.id)) {
            s.grants[g.id] = g;
        } else {
            s = add_grant(std::move(s), g);
        }
    }
    return s;
}

}  // namespace detail

/// Execute diff(bundle, env) transactionally. The whole apply validates or
/// none of it lands; immediate re-apply is a no-op. Requires the Functional
/// Administrator role in the target environment.
inline ApplyResult apply(const DeploymentBundle& bundle, Environment env,
                         const std::string& acting_user) {
    verify_bundle(bundle);
    require_admin(env.state, acting_user, kFunctionalAdministrator);

    ChangeSet changes = diff(bundle, env);
    auto entries = bundle.body.at("entries").get<std::map<std::string, CatalogueEntry>>();

    DirectoryState next = env.state;
    std::vector<std::string> created;
    try {
        for (const auto& change : changes) {
            switch (change.kind) {
                case ChangeKind::create_role: {
                    const CatalogueEntry entry = change.after.get<CatalogueEntry>();
                    next = detail::materialize_defs(std::move(next), entry);
                    next = add_role(std::move(next), entry.role);
                    next = detail::upsert_entry_grants(std::move(next), entry);
                    created.push_back(change.subject);
                    break;
                }
                case ChangeKind::update_role: {
                    const CatalogueEntry entry = change.after.get<CatalogueEntry>();
                    next = detail::materialize_defs(std::move(next), entry);
                    next.roles[entry.role.id] = entry.role;
                    next = detail::upsert_entry_grants(std::move(next), entry);
                    break;
                }
                case ChangeKind::archive_role:
                    next = archive_role(std::move(next), change.subject);
                    break;
                case ChangeKind::create_grant: {
                    const CatalogueEntry& entry = entries.at(change.after.at("entry_role").get<std::string>());
                    Grant g = change.after.at("grant").get<Grant>();
                    next = detail::materialize_defs(std::move(next), entry);
                    auto ps = entry.permission_sets.find(g.permission_set);
                    if (ps != entry.permission_sets.end()) {
                        if (next.permission_sets.count(ps->first)) {
                            next.permission_sets[ps->first] = ps->second;
                        } else {
                            next = add_permission_set(std::move(next), ps->second);
                        }
                    }
                    next = add_grant(std::move(next), g);
                    break;
                }
                case ChangeKind::remove_grant:
                    next = remove_grant(std::move(next), change.subject);
                    break;
                case ChangeKind::add_edge:
                    next = add_inheritance(std::move(next), change.after.at("senior").get<std::string>(),
                                           change.after.at("junior").get<std::string>());
                    break;
                case ChangeKind::remove_edge:
                    next = remove_inheritance(std::move(next),
                                              change.before.at("senior").get<std::string>(),
                                              change.before.at("junior").get<std::string>());
                    break;
            }
        }
        // edges of freshly created roles, both endpoints now present
        std::set<std::pair<std::string, std::string>> deferred;
        for (const auto& rid : created) {
            for (const auto& e : entries.at(rid).edges) {
                if (entries.at(e.first).role.status == RoleStatus::active &&
                    entries.at(e.second).role.status == RoleStatus::active) {
                    deferred.insert(e);
                }
            }
        }
        for (const auto& e : deferred) {
            if (!next.hierarchy.count(e)) next = add_inheritance(std::move(next), e.first, e.second);
        }
        validate_state(next);
    } catch (const Error& err) {
        throw Error(ErrorCode::integrity_failure,
                    "apply aborted, environment unchanged: " + std::string(err.what()));
    }

    env.state = std::move(next);
    env.catalogue_version = bundle.source_version;
    return {std::move(env), std::move(changes)};
}

// ---------------------------------------------------------------------------
// Role administration: split & merge
// ---------------------------------------------------------------------------

namespace detail {

inline std::set<std::string> direct_selection(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out;
    for (const auto& [gid, g] : grants_on_role(s, role_id)) {
        auto ps = s.permission_sets.find(g.permission_set);
        if (ps != s.permission_sets.end()) out.insert(ps->second.members.begin(), ps->second.members.end());
    }
    return out;
}

inline std::vector<std::string> active_members(const DirectoryState& s, const std::string& role_id) {
    std::vector<std::string> out;
    for (const auto& [key, a] : s.assignments) {
        if (key.second == role_id && a.active) out.push_back(key.first);
    }
    return out;
}

inline RoleDesign design_for(const Role& role, const std::set<std::string>& perms,
                             const std::set<std::pair<std::string, std::string>>& edges) {
    RoleDesign d;
    d.role = role;
    d.permissions = perms;
    d.edges = edges;
    return d;
}

}  // namespace detail

struct SplitSpec {
    std::set<std::string> p1;
    std::set<std::string> p2;
    std::map<std::string, int> membership;  // user -> 1 or 2; absent users get both halves
    std::optional<std::string> id1;
    std::optional<std::string> id2;
};

struct SplitResult {
    Environment environment;
    RolesCatalogue catalogue;
    std::string role1;
    std::string role2;
};

/// Split a role's direct permission selection into two roles. Former members
/// get both halves unless the membership map pins them to one; the original
/// is archived and its hierarchy edges re-point to both children. If a SOD
/// rule conflicts the two halves and any member would retain both, the split
/// fails listing those users.
inline SplitResult split_role(Environment env, RolesCatalogue catalogue, const std::string& role_id,
                              const SplitSpec& spec, const std::string& acting_user) {
    require_admin(env.state, acting_user, kFunctionalAdministrator);
    auto rit = env.state.roles.find(role_id);
    if (rit == env.state.roles.end() || rit->second.status != RoleStatus::active) {
        throw Error(ErrorCode::unknown_role, role_id);
    }
    const Role original = rit->second;

    auto direct = detail::direct_selection(env.state, role_id);
    std::set<std::string> unioned = spec.p1;
    unioned.insert(spec.p2.begin(), spec.p2.end());
    std::vector<std::string> overlap;
    std::set_intersection(spec.p1.begin(), spec.p1.end(), spec.p2.begin(), spec.p2.end(),
                          std::back_inserter(overlap));
    if (spec.p1.empty() || spec.p2.empty() || !overlap.empty() || unioned != direct) {
        throw Error(ErrorCode::not_a_partition,
                    "p1/p2 must be disjoint, non-empty, and cover the role's direct permissions");
    }
    for (const auto& [user, half] : spec.membership) {
        if (half != 1 && half != 2) {
            throw Error(ErrorCode::input_error, "membership map values must be 1 or 2");
        }
    }

    std::string r1 = spec.id1.value_or(role_id + "_1");
    std::string r2 = spec.id2.value_or(role_id + "_2");
    if (env.state.roles.count(r1) || env.state.roles.count(r2)) {
        throw Error(ErrorCode::duplicate_id, "split target role id already exists");
    }

    auto members = detail::active_members(env.state, role_id);

    DirectoryState s = env.state;
    auto make_half = [&](const std::string& id, int index, const std::set<std::string>& perms) {
        Role role = original;
        role.id = id;
        role.name = original.name + " (split " + std::to_string(index) + ")";
        role.status = RoleStatus::active;
        s = add_role(std::move(s), role);
        s = add_permission_set(std::move(s), PermissionSet{designed_permission_set_id(id), perms});
        s = add_grant(std::move(s), Grant{designed_grant_id(id), Grantee{GranteeKind::role, id},
                                          designed_permission_set_id(id), std::nullopt});
    };
    make_half(r1, 1, spec.p1);
    make_half(r2, 2, spec.p2);

    // re-point hierarchy: juniors of the original hang off both halves, and
    // whoever inherited the original now inherits both halves
    std::set<std::pair<std::string, std::string>> edges1, edges2;
    auto old_edges = s.hierarchy;
    for (const auto& [senior, junior] : old_edges) {
        if (senior == role_id) {
            edges1.emplace(r1, junior);
            edges2.emplace(r2, junior);
        }
        if (junior == role_id) {
            edges1.emplace(senior, r1);
            edges2.emplace(senior, r2);
        }
    }
    std::erase_if(s.hierarchy,
                  [&](const auto& e) { return e.first == role_id || e.second == role_id; });
    for (const auto& e : edges1) s = add_inheritance(std::move(s), e.first, e.second);
    for (const auto& e : edges2) s = add_inheritance(std::move(s), e.first, e.second);

    s = archive_role(std::move(s), role_id);

    std::vector<std::string> both_holders;
    for (const auto& user : members) {
        auto it = spec.membership.find(user);
        if (it == spec.membership.end()) {
            s = assign_role(std::move(s), user, r1);
            s = assign_role(std::move(s), user, r2);
            both_holders.push_back(user);
        } else if (it->second == 1) {
            s = assign_role(std::move(s), user, r1);
        } else {
            s = assign_role(std::move(s), user, r2);
        }
    }

    auto conflicts = sod_conflicts_between(s, r1, r2);
    if (!conflicts.empty() && !both_holders.empty()) {
        throw Error(ErrorCode::sod_violation,
                    "splitting " + role_id + " leaves users holding both conflicting halves",
                    json{{"rules", conflicts}, {"users", both_holders}});
    }
    validate_state(s);

    if (catalogue.entries.count(role_id)) {
        CatalogueEntry& old_entry = catalogue.entries[role_id];
        old_entry.role.status = RoleStatus::archived;
        old_entry.edges.clear();
        old_entry.source = "admin:split:" + role_id;
        std::string source = "admin:split:" + role_id;
        catalogue.entries[r1] = detail::materialize_entry(
            detail::design_for(s.roles.at(r1), spec.p1, edges1), old_entry.sod_tags, source, s);
        catalogue.entries[r2] = detail::materialize_entry(
            detail::design_for(s.roles.at(r2), spec.p2, edges2), old_entry.sod_tags, source, s);
        // split children's edges may reference env-local roles; keep only
        // catalogue-internal ones in the entries
        for (auto* entry : {&catalogue.entries[r1], &catalogue.entries[r2]}) {
            std::erase_if(entry->edges, [&](const auto& e) {
                return !catalogue.entries.count(e.first) || !catalogue.entries.count(e.second);
            });
        }
    }

    env.state = std::move(s);
    return {std::move(env), std::move(catalogue), std::move(r1), std::move(r2)};
}

struct MergeResult {
    Environment environment;
    RolesCatalogue catalogue;
    std::string role;
};

/// Merge two or more active roles into one: union of direct permissions,
/// responsibilities and members; instance-scoped grants re-point; hierarchy
/// edges re-point with duplicates collapsed; sources are archived. Fails if
/// the combination puts any member in violation of a SOD rule.
inline MergeResult merge_roles(Environment env, RolesCatalogue catalogue,
                               const std::vector<std::string>& sources, const std::string& new_id,
                               const std::string& acting_user,
                               const std::optional<std::string>& new_name = std::nullopt) {
    require_admin(env.state, acting_user, kFunctionalAdministrator);
    if (sources.size() < 2) {
        throw Error(ErrorCode::input_error, "merge requires at least two source roles");
    }
    std::set<std::string> source_set(sources.begin(), sources.end());
    if (source_set.size() != sources.size()) {
        throw Error(ErrorCode::input_error, "duplicate source role in merge");
    }
    for (const auto& rid : sources) {
        auto it = env.state.roles.find(rid);
        if (it == env.state.roles.end() || it->second.status != RoleStatus::active) {
            throw Error(ErrorCode::unknown_role, rid);
        }
    }
    if (env.state.roles.count(new_id)) throw Error(ErrorCode::duplicate_id, new_id);

    const DirectoryState& before = env.state;
    DirectoryState s = env.state;

    Role merged;
    merged.id = new_id;
    merged.name = new_name.value_or(new_id);
    merged.category = before.roles.at(*source_set.begin()).category;
    bool any_global = false;
    std::set<std::string> perms;
    std::set<std::string> members;
    for (const auto& rid : source_set) {
        const Role& r = before.roles.at(rid);
        merged.responsibilities.insert(r.responsibilities.begin(), r.responsibilities.end());
        if (r.org_scope.empty()) {
            any_global = true;
        } else {
            merged.org_scope.insert(r.org_scope.begin(), r.org_scope.end());
        }
        auto direct = detail::direct_selection(before, rid);
        perms.insert(direct.begin(), direct.end());
        for (const auto& u : detail::active_members(before, rid)) members.insert(u);
    }
    if (any_global) merged.org_scope.clear();

    s = add_role(std::move(s), merged);
    if (!perms.empty()) {
        s = add_permission_set(std::move(s), PermissionSet{designed_permission_set_id(new_id), perms});
        s = add_grant(std::move(s), Grant{designed_grant_id(new_id), Grantee{GranteeKind::role, new_id},
                                          designed_permission_set_id(new_id), std::nullopt});
    }
    // instance-scoped grants keep their data scope and re-point to the merge
    std::vector<Grant> repointed;
    for (const auto& rid : source_set) {
        for (const auto& [gid, g] : detail::grants_on_role(before, rid)) {
            if (!g.instance_set) {
                s.grants.erase(gid);  // folded into the union permission set
            } else {
                Grant moved = g;
                moved.grantee = Grantee{GranteeKind::role, new_id};
                s.grants[gid] = moved;
                repointed.push_back(moved);
            }
        }
    }

    std::set<std::pair<std::string, std::string>> new_edges;
    for (const auto& [senior, junior] : before.hierarchy) {
        bool senior_src = source_set.count(senior) != 0;
        bool junior_src = source_set.count(junior) != 0;
        if (senior_src && junior_src) continue;
        if (senior_src) new_edges.emplace(new_id, junior);
        if (junior_src) new_edges.emplace(senior, new_id);
    }
    std::erase_if(s.hierarchy, [&](const auto& e) {
        return source_set.count(e.first) || source_set.count(e.second);
    });
    for (const auto& e : new_edges) {
        if (!s.hierarchy.count(e)) s = add_inheritance(std::move(s), e.first, e.second);
    }

    for (const auto& rid : source_set) s = archive_role(std::move(s), rid);
    for (const auto& u : members) s = assign_role(std::move(s), u, new_id);

    // no member may end up newly in violation
    auto pre = audit_sod(before);
    std::set<std::pair<std::string, std::string>> pre_keys;
    for (const auto& v : pre) pre_keys.emplace(v.rule, v.user);
    std::vector<SodViolation> fresh;
    for (const auto& v : audit_sod(s)) {
        if (members.count(v.user) && !pre_keys.count({v.rule, v.user})) fresh.push_back(v);
    }
    if (!fresh.empty()) {
        throw Error(ErrorCode::sod_violation, "merging into " + new_id + " creates SOD violations",
                    json(fresh));
    }
    validate_state(s);

    bool any_catalogued = false;
    std::string joined;
    for (const auto& rid : source_set) {
        if (catalogue.entries.count(rid)) any_catalogued = true;
        joined += (joined.empty() ? "" : "+") + rid;
    }
    if (any_catalogued) {
        std::string source = "admin:merge:" + joined;
        std::set<std::string> tags;
        for (const auto& rid : source_set) {
            auto it = catalogue.entries.find(rid);
            if (it == catalogue.entries.end()) continue;
            tags.insert(it->second.sod_tags.begin(), it->second.sod_tags.end());
            it->second.role.status = RoleStatus::archived;
            it->second.edges.clear();
            it->second.source = source;
        }
        RoleDesign d = detail::design_for(s.roles.at(new_id), perms, new_edges);
        for (const auto& g : repointed) {
            d.extra_grants.push_back(g);
            auto ps = s.permission_sets.find(g.permission_set);
            if (ps != s.permission_sets.end()) d.extra_permission_sets[ps->first] = ps->second;
        }
        catalogue.entries[new_id] = detail::materialize_entry(d, tags, source, s);
        std::erase_if(catalogue.entries[new_id].edges, [&](const auto& e) {
            return !catalogue.entries.count(e.first) || !catalogue.entries.count(e.second);
        });
    }

    env.state = std::move(s);
    return {std::move(env), std::move(catalogue), new_id};
}

// ---------------------------------------------------------------------------
// Gated administration of directory entities
// ---------------------------------------------------------------------------

struct AdminAssignResult {
    Environment environment;
    std::vector<SodViolation> warnings;
};

inline AdminAssignResult admin_assign(Environment env, const std::string& user, const std::string& role,
                                      const std::string& acting_user, bool enforce_sod) {
    require_admin(env.state, acting_user, kUserManagement);
    auto outcome = assign_with_sod(std::move(env.state), user, role, enforce_sod);
    env.state = std::move(outcome.state);
    return {std::move(env), std::move(outcome.violations)};
}

inline Environment admin_revoke(Environment env, const std::string& user, const std::string& role,
                                const std::string& acting_user) {
    require_admin(env.state, acting_user, kUserManagement);
    env.state = revoke_role(std::move(env.state), user, role);
    return env;
}

// Functional Developer owns permission and object definitions; Functional
// Administrator owns permission sets, grants, menus, responsibilities, roles
// and hierarchy; User Management owns users and groups.
inline Environment admin_add_permission(Environment env, Permission p, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalDeveloper);
    env.state = add_permission(std::move(env.state), std::move(p));
    return env;
}
inline Environment admin_add_object_instance_set(Environment env, ObjectInstanceSet o,
                                                 const std::string& actor) {
    require_admin(env.state, actor, kFunctionalDeveloper);
    env.state = add_object_instance_set(std::move(env.state), std::move(o));
    return env;
}
inline Environment admin_add_permission_set(Environment env, PermissionSet ps, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_permission_set(std::move(env.state), std::move(ps));
    return env;
}
inline Environment admin_add_grant(Environment env, Grant g, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_grant(std::move(env.state), std::move(g));
    return env;
}
inline Environment admin_remove_grant(Environment env, const std::string& grant_id,
                                      const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = remove_grant(std::move(env.state), grant_id);
    return env;
}
inline Environment admin_add_menu(Environment env, Menu m, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_menu(std::move(env.state), std::move(m));
    return env;
}
inline Environment admin_add_responsibility(Environment env, Responsibility r, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_responsibility(std::move(env.state), std::move(r));
    return env;
}
inline Environment admin_add_role(Environment env, Role r, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_role(std::move(env.state), std::move(r));
    return env;
}
inline Environment admin_add_inheritance(Environment env, const std::string& senior,
                                         const std::string& junior, const std::string& actor) {
    require_admin(env.state, actor, kFunctionalAdministrator);
    env.state = add_inheritance(std::move(env.state), senior, junior);
    return env;
}
inline Environment admin_add_user(Environment env, User u, const std::string& actor) {
    require_admin(env.state, actor, kUserManagement);
    env.state = add_user(std::move(env.state), std::move(u));
    return env;
}
inline Environment admin_add_group(Environment env, UserGroup g, const std::string& actor) {
    require_admin(env.state, actor, kUserManagement);
    env.state = add_group(std::move(env.state), std::move(g));
    return env;
}

}  // namespace rolecycle
