#pragma once

#include "rolecycle/directory.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

/// A user holding `cardinality` or more members of a rule's conflict set.
/// Witnesses are every held member; `via` records, per witness, the held
/// assignment (or direct grant) it is reachable through.
struct SodViolation {
    std::string rule;
    std::string user;
    std::vector<std::string> witnesses;  // sorted
    std::vector<std::string> via;        // sorted, aligned with witnesses

    bool operator==(const SodViolation&) const = default;
    auto operator<=>(const SodViolation&) const = default;
};

inline void to_json(json& j, const SodViolation& v) {
    j = json{{"rule", v.rule}, {"user", v.user}, {"witnesses", v.witnesses}, {"via", v.via}};
}
inline void from_json(const json& j, SodViolation& v) {
    v.rule = j.at("rule").get<std::string>();
    v.user = j.at("user").get<std::string>();
    v.witnesses = j.at("witnesses").get<std::vector<std::string>>();
    v.via = j.at("via").get<std::vector<std::string>>();
}

namespace detail {

/// Everything the user can reach permission-wise: union of effective
/// permissions over effective roles plus the direct grant pool.
inline std::set<std::string> user_permission_union(const DirectoryState& s, const std::string& user) {
    std::set<std::string> out = direct_permission_pool(s, user);
    for (const auto& role_id : effective_roles(s, user)) {
        auto perms = effective_permissions(s, role_id);
        out.insert(perms.begin(), perms.end());
    }
    return out;
}

/// Smallest assigned role through which `member` (a role or a permission) is
/// reachable, for violation evidence.
inline std::string witness_evidence(const DirectoryState& s, const std::string& user,
                                    const std::string& member, SodScope scope) {
    std::vector<std::string> assigned;
    for (const auto& [key, a] : s.assignments) {
        if (key.first == user && a.active) assigned.push_back(a.role);
    }
    std::sort(assigned.begin(), assigned.end());
    for (const auto& r : assigned) {
        auto rit = s.roles.find(r);
        if (rit == s.roles.end() || rit->second.status != RoleStatus::active) continue;
        if (scope == SodScope::role_level) {
            if (reachable_roles(s, r).count(member)) return "assignment:" + r;
        } else {
            if (effective_permissions(s, r).count(member)) return "assignment:" + r;
        }
    }
    return "direct-grant";
}

inline std::optional<SodViolation> evaluate_rule(const DirectoryState& s, const SodRule& rule,
                                                 const std::string& user) {
    std::set<std::string> held;
    if (rule.scope == SodScope::role_level) {
        auto roles = effective_roles(s, user);
        for (const auto& m : rule.conflict_set) {
            if (roles.count(m)) held.insert(m);
        }
    } else {
        auto perms = user_permission_union(s, user);
        for (const auto& m : rule.conflict_set) {
            if (perms.count(m)) held.insert(m);
        }
    }
    if (static_cast<int>(held.size()) < rule.cardinality) return std::nullopt;
    SodViolation v;
    v.rule = rule.id;
    v.user = user;
    for (const auto& m : held) {
        v.witnesses.push_back(m);
        v.via.push_back(witness_evidence(s, user, m, rule.scope));
    }
    return v;
}

}  // namespace detail

/// Every violation in the current state, ordered by (rule id, user id).
inline std::vector<SodViolation> audit_sod(const DirectoryState& s) {
    std::vector<SodViolation> out;
    for (const auto& [rid, rule] : s.sod_rules) {
        for (const auto& [uid, user] : s.users) {
            auto v = detail::evaluate_rule(s, rule, uid);
            if (v) out.push_back(std::move(*v));
        }
    }
    return out;
}

/// Violations that would arise if `role` were assigned to `user`: rules the
/// user would violate afterwards and does not already violate now.
inline std::vector<SodViolation> check_assignment(const DirectoryState& s, const std::string& user,
                                                  const std::string& role) {
    if (!s.users.count(user)) throw Error(ErrorCode::unknown_user, user);
    if (!s.roles.count(role)) throw Error(ErrorCode::unknown_role, role);

    auto key = std::make_pair(user, role);
    auto existing = s.assignments.find(key);
    if (existing != s.assignments.end() && existing->second.active) {
        return {};  // already held; assignment would be rejected, not create violations
    }
    DirectoryState hypothetical = s;
    hypothetical.assignments[key] = Assignment{user, role, true};

    std::vector<SodViolation> out;
    for (const auto& [rid, rule] : s.sod_rules) {
        bool already = detail::evaluate_rule(s, rule, user).has_value();
        if (already) continue;
        auto post = detail::evaluate_rule(hypothetical, rule, user);
        if (post) out.push_back(std::move(*post));
    }
    return out;
}

/// Rules any single user holding both roles would violate, computed over the
/// closed (inherited) role and permission sets.
inline std::vector<std::string> sod_conflicts_between(const DirectoryState& s, const std::string& role_a,
                                                      const std::string& role_b) {
    if (!s.roles.count(role_a)) throw Error(ErrorCode::unknown_role, role_a);
    if (!s.roles.count(role_b)) throw Error(ErrorCode::unknown_role, role_b);

    std::set<std::string> roles = reachable_roles(s, role_a);
    auto rb = reachable_roles(s, role_b);
    roles.insert(rb.begin(), rb.end());
    std::set<std::string> perms = effective_permissions(s, role_a);
    auto pb = effective_permissions(s, role_b);
    perms.insert(pb.begin(), pb.end());

    std::vector<std::string> out;
    for (const auto& [rid, rule] : s.sod_rules) {
        const auto& universe = rule.scope == SodScope::role_level ? roles : perms;
        int held = 0;
        for (const auto& m : rule.conflict_set) {
            if (universe.count(m)) ++held;
        }
        if (held >= rule.cardinality) out.push_back(rid);
    }
    return out;
}

struct AssignOutcome {
    DirectoryState state;
    std::vector<SodViolation> violations;  // advisory findings when not enforcing
};

/// Assignment with SOD consultation. In advisory mode violations are returned
/// alongside the updated state; with `enforce` set the assignment is rejected
/// and the violations travel in the error details.
inline AssignOutcome assign_with_sod(DirectoryState s, const std::string& user, const std::string& role,
                                     bool enforce) {
    auto violations = check_assignment(s, user, role);
    if (enforce && !violations.empty()) {
        throw Error(ErrorCode::sod_violation,
                    "assigning " + role + " to " + user + " violates segregation-of-duties rules",
                    json(violations));
    }
    return {assign_role(std::move(s), user, role), std::move(violations)};
}

}  // namespace rolecycle
