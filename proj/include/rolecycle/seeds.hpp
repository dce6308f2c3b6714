#pragma once

#include "rolecycle/directory.hpp"

#include <string>

namespace rolecycle {

// The three administrative roles every directory is born with, and the
// bootstrap superuser holding all of them. The engine governs its own
// administration through these.
inline constexpr const char* kFunctionalAdministrator = "FUNCTIONAL_ADMINISTRATOR";
inline constexpr const char* kFunctionalDeveloper = "FUNCTIONAL_DEVELOPER";
inline constexpr const char* kUserManagement = "USER_MANAGEMENT";
inline constexpr const char* kBootstrapUser = "sysadmin";

inline bool is_seeded_admin_role(const std::string& role_id) {
    return role_id == kFunctionalAdministrator || role_id == kFunctionalDeveloper ||
           role_id == kUserManagement;
}

inline DirectoryState seed_directory() {
    DirectoryState s;
    s = add_role(std::move(s), Role{kFunctionalAdministrator, "Functional Administrator",
                                    "administration", {}, {}, RoleStatus::active});
    s = add_role(std::move(s), Role{kFunctionalDeveloper, "Functional Developer", "administration",
                                    {}, {}, RoleStatus::active});
    s = add_role(std::move(s), Role{kUserManagement, "User Management", "administration", {}, {},
                                    RoleStatus::active});
    s = add_user(std::move(s), User{kBootstrapUser, "Bootstrap Superuser", std::nullopt,
                                    UserStatus::active});
    s = assign_role(std::move(s), kBootstrapUser, kFunctionalAdministrator);
    s = assign_role(std::move(s), kBootstrapUser, kFunctionalDeveloper);
    s = assign_role(std::move(s), kBootstrapUser, kUserManagement);
    return s;
}

/// Authorization gate shared by management, engineering sign-off and the CLI:
/// the acting user must exist and hold the named admin role, directly or
/// through hierarchy.
inline void require_admin(const DirectoryState& s, const std::string& actor,
                          const std::string& admin_role) {
    auto it = s.users.find(actor);
    if (it == s.users.end() || it->second.status != UserStatus::active) {
        throw Error(ErrorCode::not_authorized, "acting user " + actor + " is not a known active user");
    }
    if (!effective_roles(s, actor).count(admin_role)) {
        throw Error(ErrorCode::not_authorized, actor + " does not hold " + admin_role);
    }
}

}  // namespace rolecycle
