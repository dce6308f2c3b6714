#pragma once

#include "rolecycle/analysis.hpp"
#include "rolecycle/seeds.hpp"
#include "rolecycle/sod.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

// ---------------------------------------------------------------------------
// Role designs and concept entries
// ---------------------------------------------------------------------------

/// Everything needed to materialize a role: the role payload, its permission
/// selection (realized as a generated permission set + grant at deploy time),
/// any extra grants with their permission sets, and hierarchy edges to create.
struct RoleDesign {
    Role role;
    std::set<std::string> permissions;
    std::vector<Grant> extra_grants;
    std::map<std::string, PermissionSet> extra_permission_sets;
    std::set<std::pair<std::string, std::string>> edges;  // (senior, junior)

    bool operator==(const RoleDesign&) const = default;
};

enum class ConceptStatus { draft, prototyped, verified, signed_off };

inline std::string to_string(ConceptStatus s) {
    switch (s) {
        case ConceptStatus::draft: return "draft";
        case ConceptStatus::prototyped: return "prototyped";
        case ConceptStatus::verified: return "verified";
        case ConceptStatus::signed_off: return "signed_off";
    }
    return "draft";
}
inline ConceptStatus concept_status_from_string(const std::string& s) {
    if (s == "draft") return ConceptStatus::draft;
    if (s == "prototyped") return ConceptStatus::prototyped;
    if (s == "verified") return ConceptStatus::verified;
    if (s == "signed_off") return ConceptStatus::signed_off;
    throw Error(ErrorCode::input_error, "bad concept status: " + s);
}

struct MembershipQualifier {
    std::string org_unit;
    std::optional<std::string> job_function;

    bool operator==(const MembershipQualifier&) const = default;
};

struct Lineage {
    std::string candidate_id;
    int analysis_version = 0;

    bool operator==(const Lineage&) const = default;
};

/// One versioned role design moving through draft -> prototyped -> verified
/// -> signed_off. Editing a non-draft entry forks a new version reset to
/// draft; signed-off versions never change.
struct ConceptEntry {
    std::string id;
    int version = 1;
    RoleDesign design;
    std::set<std::string> candidate_users;
    std::optional<MembershipQualifier> qualifier;
    std::set<std::string> sod_tags;
    ConceptStatus status = ConceptStatus::draft;
    std::optional<Lineage> lineage;

    bool same_content(const ConceptEntry& other) const {
        return design == other.design && candidate_users == other.candidate_users &&
               qualifier == other.qualifier && sod_tags == other.sod_tags && lineage == other.lineage;
    }
    bool operator==(const ConceptEntry&) const = default;
};

// id -> version -> entry
using ConceptCatalogue = std::map<std::string, std::map<int, ConceptEntry>>;

inline void to_json(json& j, const RoleDesign& d) {
    json edges = json::array();
    for (const auto& [senior, junior] : d.edges) {
        edges.push_back(json{{"senior", senior}, {"junior", junior}});
    }
    j = json{{"role", d.role},
             {"permissions", d.permissions},
             {"extra_grants", d.extra_grants},
             {"extra_permission_sets", d.extra_permission_sets},
             {"edges", edges}};
}
inline void from_json(const json& j, RoleDesign& d) {
    d.role = j.at("role").get<Role>();
    d.permissions = j.at("permissions").get<std::set<std::string>>();
    d.extra_grants = j.at("extra_grants").get<std::vector<Grant>>();
    d.extra_permission_sets = j.at("extra_permission_sets").get<std::map<std::string, PermissionSet>>();
    d.edges.clear();
    for (const auto& e : j.at("edges")) {
        d.edges.emplace(e.at("senior").get<std::string>(), e.at("junior").get<std::string>());
    }
}

inline void to_json(json& j, const MembershipQualifier& q) {
    j = json{{"org_unit", q.org_unit}, {"job_function", detail::opt_str(q.job_function)}};
}
inline void from_json(const json& j, MembershipQualifier& q) {
    q.org_unit = j.at("org_unit").get<std::string>();
    q.job_function = detail::opt_str_from(j.at("job_function"));
}

inline void to_json(json& j, const Lineage& l) {
    j = json{{"candidate_id", l.candidate_id}, {"analysis_version", l.analysis_version}};
}
inline void from_json(const json& j, Lineage& l) {
    l.candidate_id = j.at("candidate_id").get<std::string>();
    l.analysis_version = j.at("analysis_version").get<int>();
}

inline void to_json(json& j, const ConceptEntry& e) {
    j = json{{"id", e.id},
             {"version", e.version},
             {"design", e.design},
             {"candidate_users", e.candidate_users},
             {"qualifier", e.qualifier ? json(*e.qualifier) : json(nullptr)},
             {"sod_tags", e.sod_tags},
             {"status", to_string(e.status)},
             {"lineage", e.lineage ? json(*e.lineage) : json(nullptr)}};
}
inline void from_json(const json& j, ConceptEntry& e) {
    e.id = j.at("id").get<std::string>();
    e.version = j.at("version").get<int>();
    e.design = j.at("design").get<RoleDesign>();
    e.candidate_users = j.at("candidate_users").get<std::set<std::string>>();
    e.qualifier = j.at("qualifier").is_null()
                      ? std::nullopt
                      : std::optional<MembershipQualifier>(j.at("qualifier").get<MembershipQualifier>());
    e.sod_tags = j.at("sod_tags").get<std::set<std::string>>();
    e.status = concept_status_from_string(j.at("status").get<std::string>());
    e.lineage = j.at("lineage").is_null() ? std::nullopt
                                          : std::optional<Lineage>(j.at("lineage").get<Lineage>());
}

inline json concept_catalogue_to_json(const ConceptCatalogue& c) {
    json entries = json::array();
    for (const auto& [id, versions] : c) {
        for (const auto& [v, entry] : versions) entries.push_back(entry);
    }
    return json{{"entries", entries}};
}
inline ConceptCatalogue concept_catalogue_from_json(const json& j) {
    ConceptCatalogue c;
    for (const auto& e : j.at("entries")) {
        ConceptEntry entry = e.get<ConceptEntry>();
        c[entry.id][entry.version] = entry;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_design_refs(const RoleDesign& d, const std::set<std::string>& candidate_users,
                                 const DirectoryState& reference) {
    if (d.permissions.empty()) {
        throw Error(ErrorCode::empty_permission_selection, "role design selects no permissions");
    }
    for (const auto& p : d.permissions) {
        if (!reference.permissions.count(p)) {
            throw Error(ErrorCode::dangling_reference, "permission " + p);
        }
    }
    for (const auto& r : d.role.responsibilities) {
        if (!reference.responsibilities.count(r)) {
            throw Error(ErrorCode::dangling_reference, "responsibility " + r);
        }
    }
    for (const auto& ou : d.role.org_scope) {
        if (!reference.org_units.count(ou)) throw Error(ErrorCode::dangling_reference, "org unit " + ou);
    }
    for (const auto& g : d.extra_grants) {
        if (!d.extra_permission_sets.count(g.permission_set) &&
            !reference.permission_sets.count(g.permission_set)) {
            throw Error(ErrorCode::dangling_reference, "permission set " + g.permission_set);
        }
    }
    for (const auto& [id, ps] : d.extra_permission_sets) {
        for (const auto& p : ps.members) {
            if (!reference.permissions.count(p)) {
                throw Error(ErrorCode::dangling_reference, "permission " + p);
            }
        }
    }
    for (const auto& [senior, junior] : d.edges) {
        if (senior != d.role.id && !reference.roles.count(senior)) {
            throw Error(ErrorCode::dangling_reference, "role " + senior);
        }
        if (junior != d.role.id && !reference.roles.count(junior)) {
            throw Error(ErrorCode::dangling_reference, "role " + junior);
        }
    }
    for (const auto& u : candidate_users) {
        if (!reference.users.count(u)) throw Error(ErrorCode::dangling_reference, "user " + u);
    }
}

inline std::set<std::string> relevant_sod_tags(const RoleDesign& d, const DirectoryState& reference) {
    std::set<std::string> tags;
    for (const auto& [rid, rule] : reference.sod_rules) {
        if (rule.scope == SodScope::role_level) {
            if (rule.conflict_set.count(d.role.id)) tags.insert(rid);
        } else {
            for (const auto& p : d.permissions) {
                if (rule.conflict_set.count(p)) {
                    tags.insert(rid);
                    break;
                }
            }
        }
    }
    return tags;
}

}  // namespace detail

struct DesignOptions {
    std::string entry_id;  // defaults to the role id
    std::optional<MembershipQualifier> qualifier;
    std::optional<Lineage> lineage;
};

inline ConceptEntry design_role(const RoleDesign& design, std::set<std::string> candidate_users,
                                const DirectoryState& reference, DesignOptions options = {}) {
    detail::validate_design_refs(design, candidate_users, reference);
    ConceptEntry e;
    e.id = options.entry_id.empty() ? design.role.id : options.entry_id;
    e.version = 1;
    e.design = design;
    e.candidate_users = std::move(candidate_users);
    e.qualifier = options.qualifier;
    e.sod_tags = detail::relevant_sod_tags(design, reference);
    e.status = ConceptStatus::draft;
    e.lineage = options.lineage;
    return e;
}

inline ConceptEntry design_from_candidate(const CandidateRole& candidate, int analysis_version,
                                          Role role_payload, const DirectoryState& reference,
                                          DesignOptions options = {}) {
    RoleDesign d;
    d.role = std::move(role_payload);
    d.permissions = candidate.permissions;
    if (!options.lineage) options.lineage = Lineage{candidate.id, analysis_version};
    if (!options.qualifier && candidate.matched_org_unit) {
        options.qualifier = MembershipQualifier{*candidate.matched_org_unit, std::nullopt};
    }
    return design_role(d, candidate.members, reference, std::move(options));
}

/// Fork a new draft version carrying replacement content. Used for edits of
/// non-draft entries and for maintenance re-definition proposals.
inline ConceptEntry fork_entry(const ConceptEntry& latest, RoleDesign new_design,
                               std::set<std::string> candidate_users,
                               const DirectoryState& reference) {
    detail::validate_design_refs(new_design, candidate_users, reference);
    ConceptEntry e = latest;
    e.version = latest.version + 1;
    e.design = std::move(new_design);
    e.candidate_users = std::move(candidate_users);
    e.sod_tags = detail::relevant_sod_tags(e.design, reference);
    e.status = ConceptStatus::draft;
    return e;
}

// ---------------------------------------------------------------------------
// Catalogue state machine
// ---------------------------------------------------------------------------

/// Insert or advance an entry, enforcing the lifecycle: new versions enter as
/// draft and are numbered contiguously; status only moves one step along
/// draft -> prototyped -> verified -> signed_off; content changes in place are
/// allowed only while the stored version is a draft; signed-off versions are
/// immutable.
inline ConceptCatalogue catalogue_upsert(ConceptCatalogue catalogue, const ConceptEntry& entry) {
    auto& versions = catalogue[entry.id];
    auto it = versions.find(entry.version);
    if (it == versions.end()) {
        int expected = versions.empty() ? 1 : versions.rbegin()->first + 1;
        if (entry.version != expected) {
            throw Error(ErrorCode::invalid_status,
                        "entry " + entry.id + " next version must be " + std::to_string(expected));
        }
        if (entry.status != ConceptStatus::draft) {
            throw Error(ErrorCode::invalid_status, "new entry versions must start as draft");
        }
        versions.emplace(entry.version, entry);
        return catalogue;
    }
    const ConceptEntry& stored = it->second;
    if (stored == entry) return catalogue;  // no-op
    if (stored.status == ConceptStatus::signed_off) {
        throw Error(ErrorCode::invalid_status,
                    "entry " + entry.id + "@" + std::to_string(entry.version) + " is signed off");
    }
    if (stored.same_content(entry)) {
        int from = static_cast<int>(stored.status);
        int to = static_cast<int>(entry.status);
        if (to != from + 1) {
            throw Error(ErrorCode::invalid_status,
                        "illegal status transition " + to_string(stored.status) + " -> " +
                            to_string(entry.status));
        }
        it->second = entry;
        return catalogue;
    }
    if (stored.status == ConceptStatus::draft && entry.status == ConceptStatus::draft) {
        it->second = entry;  // in-place draft edit
        return catalogue;
    }
    throw Error(ErrorCode::invalid_status,
                "editing a non-draft entry requires forking a new version");
}

inline const ConceptEntry* latest_entry(const ConceptCatalogue& c, const std::string& id) {
    auto it = c.find(id);
    if (it == c.end() || it->second.empty()) return nullptr;
    return &it->second.rbegin()->second;
}

// ---------------------------------------------------------------------------
// Prototype
// ---------------------------------------------------------------------------

inline std::string designed_permission_set_id(const std::string& role_id) { return "PS_" + role_id; }
inline std::string designed_grant_id(const std::string& role_id) { return "GR_" + role_id; }

/// Materialize a design into a copy of the reference state: role, generated
/// permission set + grant for the selection, extra grants, hierarchy edges,
/// candidate-user assignments. Re-designs of an existing role replace its
/// definition. The reference itself is untouched.
inline DirectoryState build_sandbox(const ConceptEntry& entry, const DirectoryState& reference) {
    DirectoryState s = reference;
    const RoleDesign& d = entry.design;
    const std::string& rid = d.role.id;

    if (s.roles.count(rid)) {
        Role updated = d.role;
        updated.status = RoleStatus::active;
        s.roles[rid] = updated;
    } else {
        s = add_role(std::move(s), d.role);
    }

    PermissionSet ps{designed_permission_set_id(rid), d.permissions};
    if (s.permission_sets.count(ps.id)) {
        for (const auto& p : ps.members) {
            if (!s.permissions.count(p)) throw Error(ErrorCode::dangling_reference, "permission " + p);
        }
        s.permission_sets[ps.id] = ps;
    } else {
        s = add_permission_set(std::move(s), ps);
    }
    Grant g{designed_grant_id(rid), Grantee{GranteeKind::role, rid}, ps.id, std::nullopt};
    if (!s.grants.count(g.id)) {
        s = add_grant(std::move(s), g);
    } else {
        s.grants[g.id] = g;
    }

    for (const auto& [psid, extra] : d.extra_permission_sets) {
        if (!s.permission_sets.count(psid)) s = add_permission_set(std::move(s), extra);
    }
    for (const auto& extra : d.extra_grants) {
        if (!s.grants.count(extra.id)) s = add_grant(std::move(s), extra);
    }
    for (const auto& [senior, junior] : d.edges) {
        if (!s.hierarchy.count({senior, junior})) s = add_inheritance(std::move(s), senior, junior);
    }
    for (const auto& u : entry.candidate_users) {
        auto key = std::make_pair(u, rid);
        auto it = s.assignments.find(key);
        if (it == s.assignments.end() || !it->second.active) s = assign_role(std::move(s), u, rid);
    }
    validate_state(s);
    return s;
}

struct PrototypeResult {
    DirectoryState sandbox;
    ConceptEntry entry;
};

inline PrototypeResult prototype_role(ConceptEntry entry, const DirectoryState& reference) {
    if (entry.status != ConceptStatus::draft) {
        throw Error(ErrorCode::invalid_status,
                    "only draft entries can be prototyped (entry is " + to_string(entry.status) + ")");
    }
    DirectoryState sandbox = build_sandbox(entry, reference);
    entry.status = ConceptStatus::prototyped;
    return {std::move(sandbox), std::move(entry)};
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct VerificationCheck {
    std::string name;
    bool passed = false;
    std::string details;
};

struct VerificationReport {
    std::string entry_id;
    int entry_version = 0;
    bool passed = false;
    std::vector<VerificationCheck> checks;
};

inline void to_json(json& j, const VerificationCheck& c) {
    j = json{{"name", c.name}, {"passed", c.passed}, {"details", c.details}};
}
inline void to_json(json& j, const VerificationReport& r) {
    j = json{{"entry_id", r.entry_id},
             {"entry_version", r.entry_version},
             {"passed", r.passed},
             {"checks", r.checks}};
}

struct VerifyContext {
    const DirectoryState& reference;
    const OrgSnapshot* org = nullptr;          // needed when the entry has a qualifier
    const ConceptCatalogue* concepts = nullptr;  // signed-off entries to compare against
};

// Exact rational in [0, 1]; keeps similarity values out of floating point so
// catalogue bytes stay canonical.
struct Ratio {
    long long num = 0;
    long long den = 1;

    static Ratio of(long long n, long long d) {
        if (d == 0) return {0, 1};
        long long g = std::gcd(n, d);
        if (g == 0) return {0, 1};
        return {n / g, d / g};
    }
    double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Ratio&) const = default;
};

inline bool operator<(const Ratio& a, const Ratio& b) { return a.num * b.den < b.num * a.den; }

inline void to_json(json& j, const Ratio& r) { j = json{{"num", r.num}, {"den", r.den}}; }
inline void from_json(const json& j, Ratio& r) {
    r.num = j.at("num").get<long long>();
    r.den = j.at("den").get<long long>();
}

inline Ratio jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return {1, 1};
    std::vector<std::string> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    long long union_size = static_cast<long long>(a.size() + b.size() - inter.size());
    return Ratio::of(static_cast<long long>(inter.size()), union_size);
}

namespace detail {

/// Highest Jaccard similarity of the design's selection against any deployed
/// active role's effective closure or any signed-off concept's selection,
/// other versions of the same role excluded.
inline Ratio max_similarity(const ConceptEntry& entry, const DirectoryState& reference,
                            const ConceptCatalogue* concepts) {
    Ratio best{0, 1};
    for (const auto& [rid, role] : reference.roles) {
        if (rid == entry.design.role.id || role.status != RoleStatus::active) continue;
        Ratio r = jaccard(entry.design.permissions, effective_permissions(reference, rid));
        if (best < r) best = r;
    }
    if (concepts) {
        for (const auto& [id, versions] : *concepts) {
            for (const auto& [v, other] : versions) {
                if (other.status != ConceptStatus::signed_off) continue;
                if (other.design.role.id == entry.design.role.id) continue;
                Ratio r = jaccard(entry.design.permissions, other.design.permissions);
                if (best < r) best = r;
            }
        }
    }
    return best;
}

inline bool qualifier_matches(const MembershipQualifier& q, const OrgUserRecord& rec) {
    if (!rec.org_unit || *rec.org_unit != q.org_unit) return false;
    if (q.job_function && (!rec.job_function || *rec.job_function != *q.job_function)) return false;
    return true;
}

}  // namespace detail

/// The pure verification checks; running them twice on the same inputs gives
/// the same report. verify_role layers the status transition on top.
inline VerificationReport run_verification(const ConceptEntry& entry, const DirectoryState& sandbox,
                                           const VerifyContext& ctx) {
    VerificationReport report;
    report.entry_id = entry.id;
    report.entry_version = entry.version;

    {  // (a) no new SOD violations against the reference
        auto before = audit_sod(ctx.reference);
        auto after = audit_sod(sandbox);
        std::set<SodViolation> base(before.begin(), before.end());
        std::vector<SodViolation> fresh;
        for (const auto& v : after) {
            if (!base.count(v)) fresh.push_back(v);
        }
        VerificationCheck c{"sod", fresh.empty(), ""};
        if (!fresh.empty()) {
            c.details = "introduces " + std::to_string(fresh.size()) +
                        " new violation(s): " + json(fresh).dump();
        }
        report.checks.push_back(std::move(c));
    }
    {  // (b) not an exact duplicate of a signed-off or deployed role
        Ratio sim = detail::max_similarity(entry, ctx.reference, ctx.concepts);
        bool ok = sim < Ratio{1, 1};
        report.checks.push_back(
            {"duplicate", ok,
             ok ? "" : "permission selection duplicates an existing role (similarity 1.0)"});
    }
    {  // (c) membership qualifier delimits exactly the candidate users
        VerificationCheck c{"membership_qualifier", true, ""};
        if (entry.qualifier) {
            if (!ctx.org) {
                c.passed = false;
                c.details = "entry has a membership qualifier but no org snapshot was provided";
            } else {
                std::set<std::string> in_scope;
                for (const auto& [uid, rec] : ctx.org->users) {
                    if (detail::qualifier_matches(*entry.qualifier, rec)) in_scope.insert(uid);
                }
                if (in_scope != entry.candidate_users) {
                    c.passed = false;
                    c.details = "qualifier selects {" +
                                std::accumulate(in_scope.begin(), in_scope.end(), std::string{},
                                                [](std::string acc, const std::string& s) {
                                                    return acc.empty() ? s : acc + "," + s;
                                                }) +
                                "} which differs from the candidate users";
                }
            }
        }
        report.checks.push_back(std::move(c));
    }
    {  // (d) designed permissions all resolve
        VerificationCheck c{"references", true, ""};
        for (const auto& p : entry.design.permissions) {
            if (!ctx.reference.permissions.count(p)) {
                c.passed = false;
                c.details = "permission " + p + " does not exist";
                break;
            }
        }
        report.checks.push_back(std::move(c));
    }

    report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const VerificationCheck& c) { return c.passed; });
    return report;
}

struct VerifyResult {
    VerificationReport report;
    ConceptEntry entry;
};

inline VerifyResult verify_role(ConceptEntry entry, const DirectoryState& sandbox,
                                const VerifyContext& ctx) {
    if (entry.status != ConceptStatus::prototyped) {
        throw Error(ErrorCode::invalid_status,
                    "only prototyped entries can be verified (entry is " + to_string(entry.status) + ")");
    }
    VerificationReport report = run_verification(entry, sandbox, ctx);
    if (report.passed) entry.status = ConceptStatus::verified;
    return {std::move(report), std::move(entry)};
}

// ---------------------------------------------------------------------------
// Sign-off
// ---------------------------------------------------------------------------

inline ConceptEntry signoff(ConceptEntry entry, const DirectoryState& gate_state,
                            const std::string& acting_user) {
    if (entry.status != ConceptStatus::verified) {
        throw Error(ErrorCode::invalid_status,
                    "only verified entries can be signed off (entry is " + to_string(entry.status) + ")");
    }
    require_admin(gate_state, acting_user, kFunctionalAdministrator);
    entry.status = ConceptStatus::signed_off;
    return entry;
}

// ---------------------------------------------------------------------------
// Quality metrics
// ---------------------------------------------------------------------------

struct QualityMetrics {
    int user_count = 0;
    int permission_count = 0;
    int hierarchy_depth = 0;
    Ratio max_similarity{0, 1};
    bool sod_adjacent = false;
    int violation_count = 0;

    bool operator==(const QualityMetrics&) const = default;
};

inline void to_json(json& j, const QualityMetrics& m) {
    j = json{{"user_count", m.user_count},
             {"permission_count", m.permission_count},
             {"hierarchy_depth", m.hierarchy_depth},
             {"max_similarity", m.max_similarity},
             {"sod_adjacent", m.sod_adjacent},
             {"violation_count", m.violation_count}};
}

inline QualityMetrics compute_quality_metrics(const ConceptEntry& entry,
                                              const DirectoryState& reference,
                                              const ConceptCatalogue* concepts = nullptr) {
    QualityMetrics m;
    m.user_count = static_cast<int>(entry.candidate_users.size());
    m.permission_count = static_cast<int>(entry.design.permissions.size());

    {  // longest downward chain from the role over reference + design edges
        auto edges = reference.hierarchy;
        edges.insert(entry.design.edges.begin(), entry.design.edges.end());
        std::map<std::string, int> memo;
        std::set<std::string> on_path;
        std::function<int(const std::string&)> depth = [&](const std::string& role) -> int {
            auto it = memo.find(role);
            if (it != memo.end()) return it->second;
            if (!on_path.insert(role).second) return 0;  // guard: designs may be cyclic pre-verification
            int best = 0;
            for (const auto& [senior, junior] : edges) {
                if (senior == role) best = std::max(best, 1 + depth(junior));
            }
            on_path.erase(role);
            memo[role] = best;
            return best;
        };
        m.hierarchy_depth = depth(entry.design.role.id);
    }

    m.max_similarity = detail::max_similarity(entry, reference, concepts);

    for (const auto& [rid, rule] : reference.sod_rules) {
        if (rule.scope == SodScope::role_level) {
            if (rule.conflict_set.count(entry.design.role.id)) m.sod_adjacent = true;
        } else {
            for (const auto& p : entry.design.permissions) {
                if (rule.conflict_set.count(p)) {
                    m.sod_adjacent = true;
                    break;
                }
            }
        }
    }

    try {
        DirectoryState sandbox = build_sandbox(entry, reference);
        auto before = audit_sod(reference);
        auto after = audit_sod(sandbox);
        std::set<SodViolation> base(before.begin(), before.end());
        for (const auto& v : after) {
            if (!base.count(v)) ++m.violation_count;
        }
    } catch (const Error&) {
        // unbuildable design: no sandbox, no violation count
    }
    return m;
}

}  // namespace rolecycle
