// Independent brute-force oracles for closure, access and SOD semantics.
// These recompute everything with iterative worklists and flat scans, sharing
// no code path with the library's recursive implementations.
#pragma once

#include "rolecycle/model.hpp"
#include "rolecycle/sod.hpp"

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using rolecycle::DirectoryState;
using rolecycle::GranteeKind;
using rolecycle::MenuEntryKind;
using rolecycle::PermissionKind;
using rolecycle::RoleStatus;
using rolecycle::SodScope;
using rolecycle::UserStatus;

inline std::set<std::string> menu_permissions(const DirectoryState& s, const std::string& menu_id) {
    std::set<std::string> out;
    std::set<std::string> visited;
    std::deque<std::string> queue{menu_id};
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        if (!visited.insert(id).second) continue;
        auto it = s.menus.find(id);
        if (it == s.menus.end()) continue;
        for (const auto& e : it->second.entries) {
            if (e.kind == MenuEntryKind::permission) {
                out.insert(e.ref);
            } else {
                queue.push_back(e.ref);
            }
        }
    }
    return out;
}

inline std::set<std::string> role_direct(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out;
    for (const auto& [gid, g] : s.grants) {
        if (g.grantee.kind == GranteeKind::role && g.grantee.id == role_id) {
            auto ps = s.permission_sets.find(g.permission_set);
            if (ps != s.permission_sets.end()) {
                out.insert(ps->second.members.begin(), ps->second.members.end());
            }
        }
    }
    auto rit = s.roles.find(role_id);
    if (rit != s.roles.end()) {
        for (const auto& resp : rit->second.responsibilities) {
            auto it = s.responsibilities.find(resp);
            if (it != s.responsibilities.end()) {
                auto perms = menu_permissions(s, it->second.menu);
                out.insert(perms.begin(), perms.end());
            }
        }
    }
    return out;
}

/// Active roles reachable downward from role_id (inclusive), by fixed-point
/// relaxation over the edge set.
inline std::set<std::string> reachable(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out;
    auto active = [&](const std::string& r) {
        auto it = s.roles.find(r);
        return it != s.roles.end() && it->second.status == RoleStatus::active;
    };
    if (!active(role_id)) return out;
    out.insert(role_id);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [senior, junior] : s.hierarchy) {
            if (out.count(senior) && active(junior) && out.insert(junior).second) grew = true;
        }
    }
    return out;
}

inline std::set<std::string> effective_permissions(const DirectoryState& s, const std::string& role_id) {
    std::set<std::string> out = role_direct(s, role_id);
    for (const auto& r : reachable(s, role_id)) {
        auto direct = role_direct(s, r);
        out.insert(direct.begin(), direct.end());
    }
    return out;
}

inline std::set<std::string> effective_roles(const DirectoryState& s, const std::string& user_id) {
    std::set<std::string> out;
    for (const auto& [key, a] : s.assignments) {
        if (key.first != user_id || !a.active) continue;
        auto reach = reachable(s, a.role);
        out.insert(reach.begin(), reach.end());
    }
    return out;
}

inline std::set<std::string> direct_pool(const DirectoryState& s, const std::string& user_id) {
    std::set<std::string> out;
    for (const auto& [gid, g] : s.grants) {
        bool applies = (g.grantee.kind == GranteeKind::user && g.grantee.id == user_id);
        if (g.grantee.kind == GranteeKind::group) {
            auto git = s.groups.find(g.grantee.id);
            applies = git != s.groups.end() && git->second.members.count(user_id) != 0;
        }
        if (!applies) continue;
        auto ps = s.permission_sets.find(g.permission_set);
        if (ps != s.permission_sets.end()) {
            out.insert(ps->second.members.begin(), ps->second.members.end());
        }
    }
    return out;
}

inline bool check_access(const DirectoryState& s, const std::string& user, const std::string& perm,
                         const std::optional<std::string>& org = std::nullopt) {
    if (s.users.at(user).status != UserStatus::active) return false;
    if (s.permissions.at(perm).kind != PermissionKind::executable) return false;
    for (const auto& r : effective_roles(s, user)) {
        const auto& role = s.roles.at(r);
        bool scope_ok = role.org_scope.empty() || (org && role.org_scope.count(*org));
        if (scope_ok && effective_permissions(s, r).count(perm)) return true;
    }
    return direct_pool(s, user).count(perm) != 0;
}

inline std::set<std::string> user_permission_union(const DirectoryState& s, const std::string& user) {
    std::set<std::string> out = direct_pool(s, user);
    for (const auto& r : effective_roles(s, user)) {
        auto perms = effective_permissions(s, r);
        out.insert(perms.begin(), perms.end());
    }
    return out;
}

struct SodFinding {
    std::string rule;
    std::string user;
    std::set<std::string> witnesses;

    auto operator<=>(const SodFinding&) const = default;
};

inline std::vector<SodFinding> audit_sod(const DirectoryState& s) {
    std::vector<SodFinding> out;
    for (const auto& [rid, rule] : s.sod_rules) {
        for (const auto& [uid, user] : s.users) {
            std::set<std::string> universe = rule.scope == SodScope::role_level
                                                 ? effective_roles(s, uid)
                                                 : user_permission_union(s, uid);
            std::set<std::string> held;
            for (const auto& m : rule.conflict_set) {
                if (universe.count(m)) held.insert(m);
            }
            if (static_cast<int>(held.size()) >= rule.cardinality) {
                out.push_back({rid, uid, std::move(held)});
            }
        }
    }
    return out;
}

}  // namespace oracle
