#pragma once

#include "rolecycle/management.hpp"

#include <string>

namespace rolecycle {
namespace fixtures {

/// Purchasing hierarchy: MANAGER inherits BUYER inherits INQUIRY, with one
/// permission per level; pbuyer holds BUYER, pmanager holds MANAGER.
inline DirectoryState add_purchasing(DirectoryState s) {
    s = add_permission(std::move(s), Permission{"view_purchase_orders", "View Purchase Orders",
                                                PermissionKind::executable, "read purchase orders"});
    s = add_permission(std::move(s), Permission{"create_purchase_orders", "Create Purchase Orders",
                                                PermissionKind::executable, "raise purchase orders"});
    s = add_permission(std::move(s), Permission{"approve_purchase_orders", "Approve Purchase Orders",
                                                PermissionKind::executable, "approve purchase orders"});
    s = add_permission_set(std::move(s), PermissionSet{"PS_PURCH_VIEW", {"view_purchase_orders"}});
    s = add_permission_set(std::move(s), PermissionSet{"PS_PURCH_CREATE", {"create_purchase_orders"}});
    s = add_permission_set(std::move(s), PermissionSet{"PS_PURCH_APPROVE", {"approve_purchase_orders"}});

    s = add_role(std::move(s), Role{"INQUIRY", "Inquiry Role", "purchasing", {}, {}, RoleStatus::active});
    s = add_role(std::move(s), Role{"BUYER", "Buyer", "purchasing", {}, {}, RoleStatus::active});
    s = add_role(std::move(s), Role{"MANAGER", "Manager", "purchasing", {}, {}, RoleStatus::active});
    s = add_grant(std::move(s), Grant{"G_PURCH_VIEW", Grantee{GranteeKind::role, "INQUIRY"},
                                      "PS_PURCH_VIEW", std::nullopt});
    s = add_grant(std::move(s), Grant{"G_PURCH_CREATE", Grantee{GranteeKind::role, "BUYER"},
                                      "PS_PURCH_CREATE", std::nullopt});
    s = add_grant(std::move(s), Grant{"G_PURCH_APPROVE", Grantee{GranteeKind::role, "MANAGER"},
                                      "PS_PURCH_APPROVE", std::nullopt});
    s = add_inheritance(std::move(s), "MANAGER", "BUYER");
    s = add_inheritance(std::move(s), "BUYER", "INQUIRY");

    s = add_user(std::move(s), User{"pbuyer", "Purchasing Buyer", std::nullopt, UserStatus::active});
    s = add_user(std::move(s), User{"pmanager", "Purchasing Manager", std::nullopt, UserStatus::active});
    s = assign_role(std::move(s), "pbuyer", "BUYER");
    s = assign_role(std::move(s), "pmanager", "MANAGER");
    return s;
}

/// Sales role with two tunings over the same responsibility: Sales Person can
/// view orders, Sales Manager can view and approve.
inline DirectoryState add_sales(DirectoryState s) {
    s = add_permission(std::move(s), Permission{"view_orders", "View Orders",
                                                PermissionKind::executable, "read sales orders"});
    s = add_permission(std::move(s), Permission{"approve_orders", "Approve Orders",
                                                PermissionKind::executable, "approve sales orders"});
    s = add_permission(std::move(s), Permission{"orders_menu_group", "Orders",
                                                PermissionKind::abstract, "orders submenu alias"});
    s = add_permission(std::move(s), Permission{"view_employees", "View Employees",
                                                PermissionKind::executable, "read employee records"});

    s = add_menu(std::move(s), Menu{"MENU_ORDERS",
                                    {MenuEntry{MenuEntryKind::permission, "orders_menu_group"},
                                     MenuEntry{MenuEntryKind::permission, "view_orders"}}});
    s = add_menu(std::move(s), Menu{"MENU_EMPLOYEES",
                                    {MenuEntry{MenuEntryKind::permission, "view_employees"}}});
    s = add_menu(std::move(s), Menu{"MENU_SALES",
                                    {MenuEntry{MenuEntryKind::submenu, "MENU_ORDERS"},
                                     MenuEntry{MenuEntryKind::submenu, "MENU_EMPLOYEES"}}});
    s = add_responsibility(std::move(s), Responsibility{"RESP_SALES", "MENU_SALES", "Sales"});

    s = add_permission_set(std::move(s), PermissionSet{"PS_SALES_VIEW", {"view_orders"}});
    s = add_permission_set(std::move(s), PermissionSet{"PS_SALES_APPROVE", {"approve_orders"}});

    s = add_role(std::move(s), Role{"SALES_PERSON", "Sales Person", "sales", {"RESP_SALES"}, {},
                                    RoleStatus::active});
    s = add_role(std::move(s), Role{"SALES_MANAGER", "Sales Manager", "sales", {"RESP_SALES"}, {},
                                    RoleStatus::active});
    s = add_grant(std::move(s), Grant{"G_SALES_VIEW", Grantee{GranteeKind::role, "SALES_PERSON"},
                                      "PS_SALES_VIEW", std::nullopt});
    s = add_grant(std::move(s), Grant{"G_SALES_MGR_VIEW", Grantee{GranteeKind::role, "SALES_MANAGER"},
                                      "PS_SALES_VIEW", std::nullopt});
    s = add_grant(std::move(s), Grant{"G_SALES_MGR_APPROVE", Grantee{GranteeKind::role, "SALES_MANAGER"},
                                      "PS_SALES_APPROVE", std::nullopt});

    s = add_user(std::move(s), User{"sperson", "Sales Person", std::nullopt, UserStatus::active});
    s = add_user(std::move(s), User{"smanager", "Sales Manager", std::nullopt, UserStatus::active});
    s = assign_role(std::move(s), "sperson", "SALES_PERSON");
    s = assign_role(std::move(s), "smanager", "SALES_MANAGER");
    return s;
}

inline DirectoryState add_org_units(DirectoryState s) {
    s = add_org_unit(std::move(s), OrgUnit{"CORP", "Corporate", std::nullopt});
    s = add_org_unit(std::move(s), OrgUnit{"SALES_DEPT", "Sales Department", "CORP"});
    s = add_org_unit(std::move(s), OrgUnit{"PURCHASING_DEPT", "Purchasing Department", "CORP"});
    return s;
}

/// Bootstrapped environment carrying both paper examples.
inline Environment seed_fixture_environment(const std::string& name) {
    Environment env = seed_environment(name);
    env.state = add_org_units(std::move(env.state));
    env.state = add_purchasing(std::move(env.state));
    env.state = add_sales(std::move(env.state));
    validate_state(env.state);
    return env;
}

/// Matching business-view org document for the fixture users.
inline json demo_org_document() {
    return json{
        {"org_units", json::array({json{{"id", "CORP"}, {"name", "Corporate"}, {"parent", nullptr}},
                                   json{{"id", "SALES_DEPT"}, {"name", "Sales Department"}, {"parent", "CORP"}},
                                   json{{"id", "PURCHASING_DEPT"},
                                        {"name", "Purchasing Department"},
                                        {"parent", "CORP"}}})},
        {"job_functions",
         json::array({json{{"id", "JF_SALES_REP"}, {"title", "Sales Representative"},
                           {"org_unit", "SALES_DEPT"}, {"description", "sells things"}},
                      json{{"id", "JF_SALES_MGR"}, {"title", "Sales Manager"},
                           {"org_unit", "SALES_DEPT"}, {"description", "approves orders"}},
                      json{{"id", "JF_BUYER"}, {"title", "Buyer"},
                           {"org_unit", "PURCHASING_DEPT"}, {"description", "raises purchase orders"}},
                      json{{"id", "JF_PURCH_MGR"}, {"title", "Purchasing Manager"},
                           {"org_unit", "PURCHASING_DEPT"}, {"description", "approves purchases"}}})},
        {"users",
         json::array({json{{"id", "sysadmin"}, {"org_unit", "CORP"}, {"job_function", nullptr}},
                      json{{"id", "sperson"}, {"org_unit", "SALES_DEPT"}, {"job_function", "JF_SALES_REP"}},
                      json{{"id", "smanager"}, {"org_unit", "SALES_DEPT"}, {"job_function", "JF_SALES_MGR"}},
                      json{{"id", "pbuyer"}, {"org_unit", "PURCHASING_DEPT"}, {"job_function", "JF_BUYER"}},
                      json{{"id", "pmanager"},
                           {"org_unit", "PURCHASING_DEPT"},
                           {"job_function", "JF_PURCH_MGR"}}})}};
}

}  // namespace fixtures
}  // namespace rolecycle
