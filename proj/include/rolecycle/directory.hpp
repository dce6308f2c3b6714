#pragma once

#include "rolecycle/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

// ---------------------------------------------------------------------------
// Integrity
// ---------------------------------------------------------------------------

namespace detail {

inline bool hierarchy_has_cycle(const std::set<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [senior, junior] : edges) adj[senior].push_back(junior);
    // 0 unvisited, 1 on stack, 2 done
    std::map<std::string, int> mark;
    std::function<bool(const std::string&)> dfs = [&](const std::string& node) {
        int& m = mark[node];
        if (m == 1) return true;
        if (m == 2) return false;
        m = 1;
        auto it = adj.find(node);
        if (it != adj.end()) {
            for (const auto& next : it->second) {
                if (dfs(next)) return true;
            }
        }
        m = 2;
        return false;
    };
    for (const auto& [node, _] : adj) {
        if (dfs(node)) return true;
    }
    return false;
}

inline bool menu_reachable(const DirectoryState& s, const std::string& from, const std::string& target) {
    auto it = s.menus.find(from);
    if (it == s.menus.end()) return false;
    for (const auto& e : it->second.entries) {
        if (e.kind != MenuEntryKind::submenu) continue;
        if (e.ref == target || menu_reachable(s, e.ref, target)) return true;
    }
    return false;
}

}  // namespace detail

/// Full referential-integrity and acyclicity check. Store saves and apply
/// transactions run this before committing.
inline void validate_state(const DirectoryState& s) {
    auto fail = [](const std::string& what) {
        throw Error(ErrorCode::invariant_violation, what);
    };
    for (const auto& [id, ps] : s.permission_sets) {
        if (ps.members.empty()) fail("permission set " + id + " is empty");
        for (const auto& m : ps.members) {
            if (!s.permissions.count(m)) fail("permission set " + id + " references missing permission " + m);
        }
    }
    for (const auto& [id, m] : s.menus) {
        for (const auto& e : m.entries) {
            if (e.kind == MenuEntryKind::permission && !s.permissions.count(e.ref)) {
                fail("menu " + id + " references missing permission " + e.ref);
            }
            if (e.kind == MenuEntryKind::submenu && !s.menus.count(e.ref)) {
                fail("menu " + id + " references missing submenu " + e.ref);
            }
        }
        if (detail::menu_reachable(s, id, id)) fail("menu " + id + " reachable from itself");
    }
    for (const auto& [id, r] : s.responsibilities) {
        if (!s.menus.count(r.menu)) fail("responsibility " + id + " references missing menu " + r.menu);
    }
    for (const auto& [id, g] : s.grants) {
        if (!s.permission_sets.count(g.permission_set)) {
            fail("grant " + id + " references missing permission set " + g.permission_set);
        }
        if (g.instance_set && !s.object_instance_sets.count(*g.instance_set)) {
            fail("grant " + id + " references missing object instance set " + *g.instance_set);
        }
        bool ok = false;
        switch (g.grantee.kind) {
            case GranteeKind::role: ok = s.roles.count(g.grantee.id) != 0; break;
            case GranteeKind::user: ok = s.users.count(g.grantee.id) != 0; break;
            case GranteeKind::group: ok = s.groups.count(g.grantee.id) != 0; break;
        }
        if (!ok) fail("grant " + id + " references missing grantee " + g.grantee.id);
    }
    for (const auto& [id, r] : s.roles) {
        for (const auto& resp : r.responsibilities) {
            if (!s.responsibilities.count(resp)) fail("role " + id + " references missing responsibility " + resp);
        }
        for (const auto& ou : r.org_scope) {
            if (!s.org_units.count(ou)) fail("role " + id + " references missing org unit " + ou);
        }
    }
    for (const auto& [senior, junior] : s.hierarchy) {
        if (!s.roles.count(senior)) fail("hierarchy edge references missing role " + senior);
        if (!s.roles.count(junior)) fail("hierarchy edge references missing role " + junior);
    }
    if (detail::hierarchy_has_cycle(s.hierarchy)) fail("role hierarchy contains a cycle");
    for (const auto& [id, u] : s.users) {
        if (u.org_unit && !s.org_units.count(*u.org_unit)) {
            fail("user " + id + " references missing org unit " + *u.org_unit);
        }
    }
    for (const auto& [id, g] : s.groups) {
        for (const auto& m : g.members) {
            if (!s.users.count(m)) fail("group " + id + " references missing user " + m);
        }
    }
    for (const auto& [key, a] : s.assignments) {
        if (!s.users.count(a.user)) fail("assignment references missing user " + a.user);
        if (!s.roles.count(a.role)) fail("assignment references missing role " + a.role);
        if (key.first != a.user || key.second != a.role) fail("assignment key mismatch");
    }
    for (const auto& [id, u] : s.org_units) {
        if (u.parent && !s.org_units.count(*u.parent)) {
            fail("org unit " + id + " references missing parent " + *u.parent);
        }
    }
    {
        // parent links must form a forest
        std::set<std::pair<std::string, std::string>> parent_edges;
        for (const auto& [id, u] : s.org_units) {
            if (u.parent) parent_edges.emplace(id, *u.parent);
        }
        if (detail::hierarchy_has_cycle(parent_edges)) fail("org structure contains a cycle");
    }
    for (const auto& [id, rule] : s.sod_rules) {
        if (rule.cardinality < 2) fail("sod rule " + id + " has cardinality < 2");
        if (static_cast<int>(rule.conflict_set.size()) < rule.cardinality) {
            fail("sod rule " + id + " conflict set smaller than cardinality");
        }
        for (const auto& m : rule.conflict_set) {
            bool ok = rule.scope == SodScope::role_level ? s.roles.count(m) != 0
                                                         : s.permissions.count(m) != 0;
            if (!ok) fail("sod rule " + id + " references missing member " + m);
        }
    }
}

// ---------------------------------------------------------------------------
// Insertions. Every operation returns a new state; the input is untouched.
// ---------------------------------------------------------------------------

namespace detail {
inline void require_fresh_id(bool present, const std::string& id) {
    if (id.empty()) throw Error(ErrorCode::input_error, "empty id");
    if (present) throw Error(ErrorCode::duplicate_id, id + " already exists");
}
inline void require_ref(bool present, const std::string& what, const std::string& id) {
    if (!present) throw Error(ErrorCode::dangling_reference, what + " " + id + " does not exist");
}
}  // namespace detail

inline DirectoryState add_permission(DirectoryState s, Permission p) {
    detail::require_fresh_id(s.permissions.count(p.id) != 0, p.id);
    s.permissions.emplace(p.id, std::move(p));
    return s;
}

inline DirectoryState add_menu(DirectoryState s, Menu m) {
    detail::require_fresh_id(s.menus.count(m.id) != 0, m.id);
    for (const auto& e : m.entries) {
        if (e.kind == MenuEntryKind::permission) {
            detail::require_ref(s.permissions.count(e.ref) != 0, "permission", e.ref);
        } else {
            if (e.ref == m.id) throw Error(ErrorCode::cycle_detected, "menu " + m.id + " nests itself");
            detail::require_ref(s.menus.count(e.ref) != 0, "menu", e.ref);
        }
    }
    s.menus.emplace(m.id, std::move(m));
    return s;
}

inline DirectoryState add_responsibility(DirectoryState s, Responsibility r) {
    detail::require_fresh_id(s.responsibilities.count(r.id) != 0, r.id);
    detail::require_ref(s.menus.count(r.menu) != 0, "menu", r.menu);
    s.responsibilities.emplace(r.id, std::move(r));
    return s;
}

inline DirectoryState add_permission_set(DirectoryState s, PermissionSet ps) {
    detail::require_fresh_id(s.permission_sets.count(ps.id) != 0, ps.id);
    if (ps.members.empty()) {
        throw Error(ErrorCode::invariant_violation, "permission set " + ps.id + " must be non-empty");
    }
    for (const auto& m : ps.members) {
        detail::require_ref(s.permissions.count(m) != 0, "permission", m);
    }
    s.permission_sets.emplace(ps.id, std::move(ps));
    return s;
}

inline DirectoryState add_object_instance_set(DirectoryState s, ObjectInstanceSet o) {
    detail::require_fresh_id(s.object_instance_sets.count(o.id) != 0, o.id);
    s.object_instance_sets.emplace(o.id, std::move(o));
    return s;
}

inline DirectoryState add_grant(DirectoryState s, Grant g) {
    detail::require_fresh_id(s.grants.count(g.id) != 0, g.id);
    detail::require_ref(s.permission_sets.count(g.permission_set) != 0, "permission set", g.permission_set);
    if (g.instance_set) {
        detail::require_ref(s.object_instance_sets.count(*g.instance_set) != 0, "object instance set",
                            *g.instance_set);
    }
    switch (g.grantee.kind) {
        case GranteeKind::role:
            detail::require_ref(s.roles.count(g.grantee.id) != 0, "role", g.grantee.id);
            break;
        case GranteeKind::user:
            detail::require_ref(s.users.count(g.grantee.id) != 0, "user", g.grantee.id);
            break;
        case GranteeKind::group:
            detail::require_ref(s.groups.count(g.grantee.id) != 0, "group", g.grantee.id);
            break;
    }
    s.grants.emplace(g.id, std::move(g));
    return s;
}

inline DirectoryState add_role(DirectoryState s, Role r) {
    detail::require_fresh_id(s.roles.count(r.id) != 0, r.id);
    for (const auto& resp : r.responsibilities) {
        detail::require_ref(s.responsibilities.count(resp) != 0, "responsibility", resp);
    }
    for (const auto& ou : r.org_scope) {
        detail::require_ref(s.org_units.count(ou) != 0, "org unit", ou);
    }
    r.status = RoleStatus::active;
    s.roles.emplace(r.id, std::move(r));
    return s;
}

inline DirectoryState add_user(DirectoryState s, User u) {
    detail::require_fresh_id(s.users.count(u.id) != 0, u.id);
    if (u.org_unit) detail::require_ref(s.org_units.count(*u.org_unit) != 0, "org unit", *u.org_unit);
    s.users.emplace(u.id, std::move(u));
    return s;
}

inline DirectoryState add_group(DirectoryState s, UserGroup g) {
    detail::require_fresh_id(s.groups.count(g.id) != 0, g.id);
    for (const auto& m : g.members) detail::require_ref(s.users.count(m) != 0, "user", m);
    s.groups.emplace(g.id, std::move(g));
    return s;
}

inline DirectoryState add_org_unit(DirectoryState s, OrgUnit u) {
    detail::require_fresh_id(s.org_units.count(u.id) != 0, u.id);
    if (u.parent) detail::require_ref(s.org_units.count(*u.parent) != 0, "org unit", *u.parent);
    s.org_units.emplace(u.id, std::move(u));
    return s;
}

/// Add a senior->junior inheritance edge, preserving the DAG property.
inline DirectoryState add_inheritance(DirectoryState s, const std::string& senior,
                                      const std::string& junior) {
    auto sit = s.roles.find(senior);
    auto jit = s.roles.find(junior);
    if (sit == s.roles.end()) throw Error(ErrorCode::unknown_role, senior);
    if (jit == s.roles.end()) throw Error(ErrorCode::unknown_role, junior);
    if (sit->second.status != RoleStatus::active || jit->second.status != RoleStatus::active) {
        throw Error(ErrorCode::unknown_role, "inheritance requires active roles");
    }
    if (senior == junior) throw Error(ErrorCode::cycle_detected, "self-inheritance on " + senior);
    auto edges = s.hierarchy;
    edges.emplace(senior, junior);
    if (detail::hierarchy_has_cycle(edges)) {
        throw Error(ErrorCode::cycle_detected, senior + " -> " + junior + " would close a cycle");
    }
    s.hierarchy = std::move(edges);
    return s;
}

inline DirectoryState remove_inheritance(DirectoryState s, const std::string& senior,
                                         const std::string& junior) {
    s.hierarchy.erase({senior, junior});
    return s;
}

inline DirectoryState remove_grant(DirectoryState s, const std::string& grant_id) {
    if (!s.grants.count(grant_id)) throw Error(ErrorCode::unknown_entity, "grant " + grant_id);
    s.grants.erase(grant_id);
    return s;
}

/// Deletion is modeled as archival: the role drops out of access decisions
/// and new assignments but stays referenceable for audit. Active assignments
/// to it are deactivated.
inline DirectoryState archive_role(DirectoryState s, const std::string& role_id) {
    auto it = s.roles.find(role_id);
    if (it == s.roles.end()) throw Error(ErrorCode::unknown_role, role_id);
    it->second.status = RoleStatus::archived;
    for (auto& [key, a] : s.assignments) {
        if (key.second == role_id) a.active = false;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

/// SOD-unaware assignment primitive; callers that enforce segregation of
/// duties go through sod.hpp's assign_with_sod.
inline DirectoryState assign_role(DirectoryState s, const std::string& user, const std::string& role) {
    if (!s.users.count(user)) throw Error(ErrorCode::unknown_user, user);
    auto rit = s.roles.find(role);
    if (rit == s.roles.end()) throw Error(ErrorCode::unknown_role, role);
    if (rit->second.status != RoleStatus::active) {
        throw Error(ErrorCode::unknown_role, role + " is archived");
    }
    auto key = std::make_pair(user, role);
    auto ait = s.assignments.find(key);
    if (ait != s.assignments.end() && ait->second.active) {
        throw Error(ErrorCode::duplicate_assignment, user + " already holds " + role);
    }
    s.assignments[key] = Assignment{user, role, true};
    return s;
}

inline DirectoryState revoke_role(DirectoryState s, const std::string& user, const std::string& role) {
    if (!s.users.count(user)) throw Error(ErrorCode::unknown_user, user);
    if (!s.roles.count(role)) throw Error(ErrorCode::unknown_role, role);
    auto it = s.assignments.find(std::make_pair(user, role));
    if (it == s.assignments.end() || !it->second.active) {
        throw Error(ErrorCode::no_such_assignment, user + " does not hold " + role);
    }
    it->second.active = false;
    return s;
}

// ---------------------------------------------------------------------------
// Closures and access decisions
// ---------------------------------------------------------------------------

/// Permission ids reachable from a menu, submenus flattened. Both executable
/// and abstract entries are included; the kind rule is applied at
/// check_access, not here.
inline std::set<std::string> flatten_menu(const DirectoryState& s, const std::string& menu_id) {
    std::set<std::string> out;
    std::set<std::string> seen;
    std::function<void(const std::string&)> walk = [&](const std::string& id) {
        if (!seen.insert(id).second) return;
        auto it = s.menus.find(id);
        if (it == s.menus.end()) return;
        for (const auto& e : it->second.entries) {
            if (e.kind == MenuEntryKind::permission) {
                out.insert(e.ref);
            } else {
                walk(e.ref);
            }
        }
    };
    walk(menu_id);
    return out;
}

/// Permissions a role carries on its own: permission sets granted to it plus
/// its responsibilities' flattened menus. No hierarchy.
inline std::set<std::string> role_direct_permissions(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out;
    auto rit = s.roles.find(role_id);
    if (rit == s.roles.end()) return out;
    for (const auto& [gid, g] : s.grants) {
        if (g.grantee.kind != GranteeKind::role || g.grantee.id != role_id) continue;
        auto pit = s.permission_sets.find(g.permission_set);
        if (pit == s.permission_sets.end()) continue;
        out.insert(pit->second.members.begin(), pit->second.members.end());
    }
    for (const auto& resp_id : rit->second.responsibilities) {
        auto it = s.responsibilities.find(resp_id);
        if (it == s.responsibilities.end()) continue;
        auto menu_perms = flatten_menu(s, it->second.menu);
        out.insert(menu_perms.begin(), menu_perms.end());
    }
    return out;
}

/// Active junior roles reachable from `role_id`, including itself. Archived
/// roles are neither entered nor traversed.
inline std::set<std::string> reachable_roles(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out;
    std::function<void(const std::string&)> walk = [&](const std::string& id) {
        auto rit = s.roles.find(id);
        if (rit == s.roles.end() || rit->second.status != RoleStatus::active) return;
        if (!out.insert(id).second) return;
        for (const auto& [senior, junior] : s.hierarchy) {
            if (senior == id) walk(junior);
        }
    };
    walk(role_id);
    return out;
}

/// Closure of a role's permission surface: own direct permissions plus every
/// active junior's, transitively.
inline std::set<std::string> effective_permissions(const DirectoryState& s, const std::string& role_id) {
    if (!s.roles.count(role_id)) throw Error(ErrorCode::unknown_role, role_id);
    std::set<std::string> out = role_direct_permissions(s, role_id);
    for (const auto& junior : reachable_roles(s, role_id)) {
        if (junior == role_id) continue;
        auto direct = role_direct_permissions(s, junior);
        out.insert(direct.begin(), direct.end());
    }
    return out;
}

/// Roles a user holds: active assignments plus inherited juniors, archived
/// roles excluded.
inline std::set<std::string> effective_roles(const DirectoryState& s, const std::string& user_id) {
    if (!s.users.count(user_id)) throw Error(ErrorCode::unknown_user, user_id);
    std::set<std::string> out;
    for (const auto& [key, a] : s.assignments) {
        if (key.first != user_id || !a.active) continue;
        auto rit = s.roles.find(a.role);
        if (rit == s.roles.end() || rit->second.status != RoleStatus::active) continue;
        auto reach = reachable_roles(s, a.role);
        out.insert(reach.begin(), reach.end());
    }
    return out;
}

/// Permissions granted straight to the user or to a group containing the
/// user, bypassing roles.
inline std::set<std::string> direct_permission_pool(const DirectoryState& s, const std::string& user_id) {
    std::set<std::string> out;
    for (const auto& [gid, g] : s.grants) {
        bool applies = false;
        if (g.grantee.kind == GranteeKind::user && g.grantee.id == user_id) {
            applies = true;
        } else if (g.grantee.kind == GranteeKind::group) {
            auto git = s.groups.find(g.grantee.id);
            applies = git != s.groups.end() && git->second.members.count(user_id) != 0;
        }
        if (!applies) continue;
        auto pit = s.permission_sets.find(g.permission_set);
        if (pit == s.permission_sets.end()) continue;
        out.insert(pit->second.members.begin(), pit->second.members.end());
    }
    return out;
}

struct AccessDecision {
    bool allowed = false;
    std::string reason;
    std::optional<std::string> witness_role;    // effective role that allowed
    std::optional<std::string> witness_source;  // grant or responsibility id behind it

    bool operator==(const AccessDecision&) const = default;
};

inline void to_json(json& j, const AccessDecision& d) {
    j = json{{"allowed", d.allowed},
             {"reason", d.reason},
             {"witness_role", detail::opt_str(d.witness_role)},
             {"witness_source", detail::opt_str(d.witness_source)}};
}

/// Pure decision function. Allow iff the permission is executable and either
/// some effective role whose org scope admits the context carries it, or a
/// direct user/group grant does. The trace names the lexicographically
/// smallest witnessing (role, source) pair; role witnesses win over direct
/// grants.
inline AccessDecision check_access(const DirectoryState& s, const std::string& user_id,
                                   const std::string& permission_id,
                                   const std::optional<std::string>& org_context = std::nullopt) {
    auto uit = s.users.find(user_id);
    if (uit == s.users.end()) throw Error(ErrorCode::unknown_user, user_id);
    auto pit = s.permissions.find(permission_id);
    if (pit == s.permissions.end()) throw Error(ErrorCode::unknown_permission, permission_id);

    if (uit->second.status != UserStatus::active) {
        return {false, "user " + user_id + " is disabled", std::nullopt, std::nullopt};
    }
    if (pit->second.kind != PermissionKind::executable) {
        return {false, "permission " + permission_id + " is abstract and cannot be executed",
                std::nullopt, std::nullopt};
    }

    // Sources within a role: grants to it or menus of its responsibilities.
    auto sources_of = [&](const std::string& role_id) {
        std::set<std::string> srcs;
        for (const auto& [gid, g] : s.grants) {
            if (g.grantee.kind != GranteeKind::role || g.grantee.id != role_id) continue;
            auto ps = s.permission_sets.find(g.permission_set);
            if (ps != s.permission_sets.end() && ps->second.members.count(permission_id)) {
                srcs.insert(gid);
            }
        }
        auto rit = s.roles.find(role_id);
        if (rit != s.roles.end()) {
            for (const auto& resp_id : rit->second.responsibilities) {
                auto it = s.responsibilities.find(resp_id);
                if (it != s.responsibilities.end() && flatten_menu(s, it->second.menu).count(permission_id)) {
                    srcs.insert(resp_id);
                }
            }
        }
        return srcs;
    };

    std::optional<std::pair<std::string, std::string>> best;  // (role, source)
    for (const auto& role_id : effective_roles(s, user_id)) {
        const Role& role = s.roles.at(role_id);
        bool scope_ok = role.org_scope.empty() ||
                        (org_context.has_value() && role.org_scope.count(*org_context) != 0);
        if (!scope_ok) continue;
        if (!effective_permissions(s, role_id).count(permission_id)) continue;
        // the witnessing source may sit on a junior of the witnessing role
        for (const auto& member : reachable_roles(s, role_id)) {
            for (const auto& src : sources_of(member)) {
                auto cand = std::make_pair(role_id, src);
                if (!best || cand < *best) best = cand;
            }
        }
    }
    if (best) {
        return {true,
                "allowed via role " + best->first + " (source " + best->second + ")",
                best->first, best->second};
    }

    // direct user/group grants, unscoped by design
    std::optional<std::string> direct;
    for (const auto& [gid, g] : s.grants) {
        bool applies = false;
        if (g.grantee.kind == GranteeKind::user && g.grantee.id == user_id) {
            applies = true;
        } else if (g.grantee.kind == GranteeKind::group) {
            auto git = s.groups.find(g.grantee.id);
            applies = git != s.groups.end() && git->second.members.count(user_id) != 0;
        }
        if (!applies) continue;
        auto ps = s.permission_sets.find(g.permission_set);
        if (ps == s.permission_sets.end() || !ps->second.members.count(permission_id)) continue;
        if (!direct || gid < *direct) direct = gid;
    }
    if (direct) {
        return {true, "allowed via direct grant " + *direct, std::nullopt, direct};
    }
    return {false, "no effective role or direct grant carries " + permission_id, std::nullopt,
            std::nullopt};
}

}  // namespace rolecycle
