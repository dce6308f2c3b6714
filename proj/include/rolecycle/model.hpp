#pragma once

#include "rolecycle/errors.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rolecycle {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

enum class PermissionKind { executable, abstract };

/// A function in the directory. Executable permissions invoke a transaction,
/// page, report or service; abstract ones only group menu entries and can
/// never satisfy an access check.
struct Permission {
    std::string id;
    std::string function_name;
    PermissionKind kind = PermissionKind::executable;
    std::string description;

    bool operator==(const Permission&) const = default;
};

enum class MenuEntryKind { permission, submenu };

struct MenuEntry {
    MenuEntryKind kind = MenuEntryKind::permission;
    std::string ref;

    bool operator==(const MenuEntry&) const = default;
};

/// Ordered grouping of permissions and submenus. Nesting is acyclic.
struct Menu {
    std::string id;
    std::vector<MenuEntry> entries;

    bool operator==(const Menu&) const = default;
};

struct Responsibility {
    std::string id;
    std::string menu;
    std::string name;

    bool operator==(const Responsibility&) const = default;
};

struct PermissionSet {
    std::string id;
    std::set<std::string> members;

    bool operator==(const PermissionSet&) const = default;
};

/// Data-scope tag attached to grants. The predicate is an opaque label; the
/// engine never evaluates it against real data.
struct ObjectInstanceSet {
    std::string id;
    std::string object_name;
    std::string predicate_label;

    bool operator==(const ObjectInstanceSet&) const = default;
};

enum class GranteeKind { role, user, group };

struct Grantee {
    GranteeKind kind = GranteeKind::role;
    std::string id;

    bool operator==(const Grantee&) const = default;
    auto operator<=>(const Grantee&) const = default;
};

struct Grant {
    std::string id;
    Grantee grantee;
    std::string permission_set;
    std::optional<std::string> instance_set;

    bool operator==(const Grant&) const = default;
};

enum class RoleStatus { active, archived };

struct Role {
    std::string id;
    std::string name;
    std::string category;
    std::set<std::string> responsibilities;
    std::set<std::string> org_scope;  // empty means globally scoped
    RoleStatus status = RoleStatus::active;

    bool operator==(const Role&) const = default;
};

enum class UserStatus { active, disabled };

struct User {
    std::string id;
    std::string display_name;
    std::optional<std::string> org_unit;
    UserStatus status = UserStatus::active;

    bool operator==(const User&) const = default;
};

struct UserGroup {
    std::string id;
    std::set<std::string> members;

    bool operator==(const UserGroup&) const = default;
};

struct Assignment {
    std::string user;
    std::string role;
    bool active = true;

    bool operator==(const Assignment&) const = default;
};

struct OrgUnit {
    std::string id;
    std::string name;
    std::optional<std::string> parent;

    bool operator==(const OrgUnit&) const = default;
};

enum class SodScope { role_level, permission_level };

/// Static segregation-of-duties rule: no user may hold `cardinality` or more
/// members of `conflict_set`, counted over effective roles or effective
/// permissions depending on scope.
struct SodRule {
    std::string id;
    SodScope scope = SodScope::role_level;
    std::set<std::string> conflict_set;
    int cardinality = 2;
    std::string rationale;

    bool operator==(const SodRule&) const = default;
};

// ---------------------------------------------------------------------------
// DirectoryState
// ---------------------------------------------------------------------------

/// The live RBAC graph. An immutable value: operations in directory.hpp take
/// a state and return a new one, so snapshots can be shared freely.
struct DirectoryState {
    std::map<std::string, Permission> permissions;
    std::map<std::string, Menu> menus;
    std::map<std::string, Responsibility> responsibilities;
    std::map<std::string, PermissionSet> permission_sets;
    std::map<std::string, ObjectInstanceSet> object_instance_sets;
    std::map<std::string, Grant> grants;
    std::map<std::string, Role> roles;
    std::set<std::pair<std::string, std::string>> hierarchy;  // (senior, junior)
    std::map<std::string, User> users;
    std::map<std::string, UserGroup> groups;
    std::map<std::pair<std::string, std::string>, Assignment> assignments;  // (user, role)
    std::map<std::string, OrgUnit> org_units;
    std::map<std::string, SodRule> sod_rules;

    bool operator==(const DirectoryState&) const = default;
};

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

inline std::string to_string(PermissionKind k) {
    return k == PermissionKind::executable ? "executable" : "abstract";
}
inline PermissionKind permission_kind_from_string(const std::string& s) {
    if (s == "executable") return PermissionKind::executable;
    if (s == "abstract") return PermissionKind::abstract;
    throw Error(ErrorCode::input_error, "bad permission kind: " + s);
}

inline std::string to_string(MenuEntryKind k) {
    return k == MenuEntryKind::permission ? "permission" : "submenu";
}
inline MenuEntryKind menu_entry_kind_from_string(const std::string& s) {
    if (s == "permission") return MenuEntryKind::permission;
    if (s == "submenu") return MenuEntryKind::submenu;
    throw Error(ErrorCode::input_error, "bad menu entry kind: " + s);
}

inline std::string to_string(GranteeKind k) {
    switch (k) {
        case GranteeKind::role: return "role";
        case GranteeKind::user: return "user";
        case GranteeKind::group: return "group";
    }
    return "role";
}
inline GranteeKind grantee_kind_from_string(const std::string& s) {
    if (s == "role") return GranteeKind::role;
    if (s == "user") return GranteeKind::user;
    if (s == "group") return GranteeKind::group;
    throw Error(ErrorCode::input_error, "bad grantee kind: " + s);
}

inline std::string to_string(RoleStatus s) {
    return s == RoleStatus::active ? "active" : "archived";
}
inline RoleStatus role_status_from_string(const std::string& s) {
    if (s == "active") return RoleStatus::active;
    if (s == "archived") return RoleStatus::archived;
    throw Error(ErrorCode::input_error, "bad role status: " + s);
}

inline std::string to_string(UserStatus s) {
    return s == UserStatus::active ? "active" : "disabled";
}
inline UserStatus user_status_from_string(const std::string& s) {
    if (s == "active") return UserStatus::active;
    if (s == "disabled") return UserStatus::disabled;
    throw Error(ErrorCode::input_error, "bad user status: " + s);
}

inline std::string to_string(SodScope s) {
    return s == SodScope::role_level ? "role_level" : "permission_level";
}
inline SodScope sod_scope_from_string(const std::string& s) {
    if (s == "role_level") return SodScope::role_level;
    if (s == "permission_level") return SodScope::permission_level;
    throw Error(ErrorCode::input_error, "bad sod scope: " + s);
}

// ---------------------------------------------------------------------------
// JSON serialization
//
// Keyed collections serialize as objects keyed by id; sets as sorted arrays
// (std::set iterates sorted). The output composes into the store's canonical
// form without further normalization.
// ---------------------------------------------------------------------------

namespace detail {
inline json opt_str(const std::optional<std::string>& v) {
    return v ? json(*v) : json(nullptr);
}
inline std::optional<std::string> opt_str_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}
}  // namespace detail

inline void to_json(json& j, const Permission& p) {
    j = json{{"id", p.id},
             {"function_name", p.function_name},
             {"kind", to_string(p.kind)},
             {"description", p.description}};
}
inline void from_json(const json& j, Permission& p) {
    p.id = j.at("id").get<std::string>();
    p.function_name = j.at("function_name").get<std::string>();
    p.kind = permission_kind_from_string(j.at("kind").get<std::string>());
    p.description = j.at("description").get<std::string>();
}

inline void to_json(json& j, const MenuEntry& e) {
    j = json{{"kind", to_string(e.kind)}, {"ref", e.ref}};
}
inline void from_json(const json& j, MenuEntry& e) {
    e.kind = menu_entry_kind_from_string(j.at("kind").get<std::string>());
    e.ref = j.at("ref").get<std::string>();
}

inline void to_json(json& j, const Menu& m) {
    j = json{{"id", m.id}, {"entries", m.entries}};
}
inline void from_json(const json& j, Menu& m) {
    m.id = j.at("id").get<std::string>();
    m.entries = j.at("entries").get<std::vector<MenuEntry>>();
}

inline void to_json(json& j, const Responsibility& r) {
    j = json{{"id", r.id}, {"menu", r.menu}, {"name", r.name}};
}
inline void from_json(const json& j, Responsibility& r) {
    r.id = j.at("id").get<std::string>();
    r.menu = j.at("menu").get<std::string>();
    r.name = j.at("name").get<std::string>();
}

inline void to_json(json& j, const PermissionSet& s) {
    j = json{{"id", s.id}, {"members", s.members}};
}
inline void from_json(const json& j, PermissionSet& s) {
    s.id = j.at("id").get<std::string>();
    s.members = j.at("members").get<std::set<std::string>>();
}

inline void to_json(json& j, const ObjectInstanceSet& s) {
    j = json{{"id", s.id}, {"object_name", s.object_name}, {"predicate_label", s.predicate_label}};
}
inline void from_json(const json& j, ObjectInstanceSet& s) {
    s.id = j.at("id").get<std::string>();
    s.object_name = j.at("object_name").get<std::string>();
    s.predicate_label = j.at("predicate_label").get<std::string>();
}

inline void to_json(json& j, const Grantee& g) {
    j = json{{"kind", to_string(g.kind)}, {"id", g.id}};
}
inline void from_json(const json& j, Grantee& g) {
    g.kind = grantee_kind_from_string(j.at("kind").get<std::string>());
    g.id = j.at("id").get<std::string>();
}

inline void to_json(json& j, const Grant& g) {
    j = json{{"id", g.id},
             {"grantee", g.grantee},
             {"permission_set", g.permission_set},
             {"instance_set", detail::opt_str(g.instance_set)}};
}
inline void from_json(const json& j, Grant& g) {
    g.id = j.at("id").get<std::string>();
    g.grantee = j.at("grantee").get<Grantee>();
    g.permission_set = j.at("permission_set").get<std::string>();
    g.instance_set = detail::opt_str_from(j.at("instance_set"));
}

inline void to_json(json& j, const Role& r) {
    j = json{{"id", r.id},
             {"name", r.name},
             {"category", r.category},
             {"responsibilities", r.responsibilities},
             {"org_scope", r.org_scope},
             {"status", to_string(r.status)}};
}
inline void from_json(const json& j, Role& r) {
    r.id = j.at("id").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.category = j.at("category").get<std::string>();
    r.responsibilities = j.at("responsibilities").get<std::set<std::string>>();
    r.org_scope = j.at("org_scope").get<std::set<std::string>>();
    r.status = role_status_from_string(j.at("status").get<std::string>());
}

inline void to_json(json& j, const User& u) {
    j = json{{"id", u.id},
             {"display_name", u.display_name},
             {"org_unit", detail::opt_str(u.org_unit)},
             {"status", to_string(u.status)}};
}
inline void from_json(const json& j, User& u) {
    u.id = j.at("id").get<std::string>();
    u.display_name = j.at("display_name").get<std::string>();
    u.org_unit = detail::opt_str_from(j.at("org_unit"));
    u.status = user_status_from_string(j.at("status").get<std::string>());
}

inline void to_json(json& j, const UserGroup& g) {
    j = json{{"id", g.id}, {"members", g.members}};
}
inline void from_json(const json& j, UserGroup& g) {
    g.id = j.at("id").get<std::string>();
    g.members = j.at("members").get<std::set<std::string>>();
}

inline void to_json(json& j, const Assignment& a) {
    j = json{{"user", a.user}, {"role", a.role}, {"active", a.active}};
}
inline void from_json(const json& j, Assignment& a) {
    a.user = j.at("user").get<std::string>();
    a.role = j.at("role").get<std::string>();
    a.active = j.at("active").get<bool>();
}

inline void to_json(json& j, const OrgUnit& u) {
    j = json{{"id", u.id}, {"name", u.name}, {"parent", detail::opt_str(u.parent)}};
}
inline void from_json(const json& j, OrgUnit& u) {
    u.id = j.at("id").get<std::string>();
    u.name = j.at("name").get<std::string>();
    u.parent = detail::opt_str_from(j.at("parent"));
}

inline void to_json(json& j, const SodRule& r) {
    j = json{{"id", r.id},
             {"scope", to_string(r.scope)},
             {"conflict_set", r.conflict_set},
             {"cardinality", r.cardinality},
             {"rationale", r.rationale}};
}
inline void from_json(const json& j, SodRule& r) {
    r.id = j.at("id").get<std::string>();
    r.scope = sod_scope_from_string(j.at("scope").get<std::string>());
    r.conflict_set = j.at("conflict_set").get<std::set<std::string>>();
    r.cardinality = j.at("cardinality").get<int>();
    r.rationale = j.at("rationale").get<std::string>();
}

inline void to_json(json& j, const DirectoryState& s) {
    json hierarchy = json::array();
    for (const auto& [senior, junior] : s.hierarchy) {
        hierarchy.push_back(json{{"senior", senior}, {"junior", junior}});
    }
    json assignments = json::array();
    for (const auto& [key, a] : s.assignments) assignments.push_back(a);

    j = json{{"permissions", s.permissions},
             {"menus", s.menus},
             {"responsibilities", s.responsibilities},
             {"permission_sets", s.permission_sets},
             {"object_instance_sets", s.object_instance_sets},
             {"grants", s.grants},
             {"roles", s.roles},
             {"hierarchy", hierarchy},
             {"users", s.users},
             {"groups", s.groups},
             {"assignments", assignments},
             {"org_units", s.org_units},
             {"sod_rules", s.sod_rules}};
}
inline void from_json(const json& j, DirectoryState& s) {
    s.permissions = j.at("permissions").get<std::map<std::string, Permission>>();
    s.menus = j.at("menus").get<std::map<std::string, Menu>>();
    s.responsibilities = j.at("responsibilities").get<std::map<std::string, Responsibility>>();
    s.permission_sets = j.at("permission_sets").get<std::map<std::string, PermissionSet>>();
    s.object_instance_sets =
        j.at("object_instance_sets").get<std::map<std::string, ObjectInstanceSet>>();
    s.grants = j.at("grants").get<std::map<std::string, Grant>>();
    s.roles = j.at("roles").get<std::map<std::string, Role>>();
    s.hierarchy.clear();
    for (const auto& e : j.at("hierarchy")) {
        s.hierarchy.emplace(e.at("senior").get<std::string>(), e.at("junior").get<std::string>());
    }
    s.users = j.at("users").get<std::map<std::string, User>>();
    s.groups = j.at("groups").get<std::map<std::string, UserGroup>>();
    s.assignments.clear();
    for (const auto& e : j.at("assignments")) {
        Assignment a = e.get<Assignment>();
        s.assignments.emplace(std::make_pair(a.user, a.role), a);
    }
    s.org_units = j.at("org_units").get<std::map<std::string, OrgUnit>>();
    s.sod_rules = j.at("sod_rules").get<std::map<std::string, SodRule>>();
}

}  // namespace rolecycle
