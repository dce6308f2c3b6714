#pragma once

#include "rolecycle/directory.hpp"
#include "rolecycle/org.hpp"
#include "rolecycle/store.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolecycle {

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Snapshot bundle the mining pipeline runs on: the directory, the business
/// org view, and per-user flattened permission profiles (effective executable
/// closure from assignments, hierarchy and direct grants).
struct AnalysisInput {
    DirectoryState state;
    OrgSnapshot org;
    std::map<std::string, std::set<std::string>> profiles;  // user -> executable permissions
    std::string input_digest;                                // identity for reconcile checks
};

inline AnalysisInput ingest(const DirectoryState& state, const OrgSnapshot& org) {
    AnalysisInput input;
    input.state = state;
    input.org = org;
    for (const auto& [uid, user] : state.users) {
        std::set<std::string> perms = direct_permission_pool(state, uid);
        for (const auto& role_id : effective_roles(state, uid)) {
            auto eff = effective_permissions(state, role_id);
            perms.insert(eff.begin(), eff.end());
        }
        std::set<std::string> executable;
        for (const auto& p : perms) {
            auto it = state.permissions.find(p);
            if (it != state.permissions.end() && it->second.kind == PermissionKind::executable) {
                executable.insert(p);
            }
        }
        input.profiles.emplace(uid, std::move(executable));
    }
    json identity{{"state", state}, {"org", org}};
    input.input_digest = canonical_digest(identity);
    return input;
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

enum class Provenance { profile, intersection, org_node };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::profile: return "profile";
        case Provenance::intersection: return "intersection";
        case Provenance::org_node: return "org_node";
    }
    return "profile";
}
inline Provenance provenance_from_string(const std::string& s) {
    if (s == "profile") return Provenance::profile;
    if (s == "intersection") return Provenance::intersection;
    if (s == "org_node") return Provenance::org_node;
    throw Error(ErrorCode::input_error, "bad provenance: " + s);
}

struct CandidateRole {
    std::string id;
    std::set<std::string> permissions;
    std::set<std::string> members;
    std::vector<Provenance> provenance;
    std::optional<std::string> matched_org_unit;
    bool no_natural_home = false;
    long long coverage_score = 0;  // |members| * |permissions|

    bool operator==(const CandidateRole&) const = default;
};

inline void to_json(json& j, const CandidateRole& c) {
    json prov = json::array();
    for (auto p : c.provenance) prov.push_back(to_string(p));
    j = json{{"id", c.id},
             {"permissions", c.permissions},
             {"members", c.members},
             {"provenance", prov},
             {"matched_org_unit", detail::opt_str(c.matched_org_unit)},
             {"no_natural_home", c.no_natural_home},
             {"coverage_score", c.coverage_score}};
}
inline void from_json(const json& j, CandidateRole& c) {
    c.id = j.at("id").get<std::string>();
    c.permissions = j.at("permissions").get<std::set<std::string>>();
    c.members = j.at("members").get<std::set<std::string>>();
    c.provenance.clear();
    for (const auto& p : j.at("provenance")) c.provenance.push_back(provenance_from_string(p));
    c.matched_org_unit = detail::opt_str_from(j.at("matched_org_unit"));
    c.no_natural_home = j.at("no_natural_home").get<bool>();
    c.coverage_score = j.at("coverage_score").get<long long>();
}

struct CandidateList {
    std::string input_digest;
    std::vector<CandidateRole> candidates;
};

struct MiningParams {
    int min_users = 2;
    int min_perms = 2;
};

inline void to_json(json& j, const MiningParams& p) {
    j = json{{"min_users", p.min_users}, {"min_perms", p.min_perms}};
}

namespace detail {

inline std::vector<std::string> sorted_vec(const std::set<std::string>& s) {
    return {s.begin(), s.end()};
}

inline long long score_of(const CandidateRole& c) {
    return static_cast<long long>(c.members.size()) * static_cast<long long>(c.permissions.size());
}

}  // namespace detail

/// Candidate generation, steps 1 and 2 of the bottom-up pass.
///
/// Step 1: one candidate per distinct non-empty profile; members are the
/// users sharing it exactly. Step 2: a single pass over pairs of distinct
/// profiles; an intersection with at least min_perms permissions whose two
/// source profiles together have at least min_users members becomes an
/// intersection candidate. Intersection members are every user whose profile
/// contains the intersection, so identical intersections collapse to one
/// candidate. Intersections are not re-intersected.
///
/// Ids are assigned in sorted-permission-list order: P0001.. for profiles,
/// I0001.. for intersections, making generation deterministic.
inline std::vector<CandidateRole> enumerate_bottom_up_candidates(const AnalysisInput& input,
                                                                 const MiningParams& params) {
    if (params.min_users < 1 || params.min_perms < 1) {
        throw Error(ErrorCode::input_error, "mining params must be >= 1");
    }
    // distinct non-empty profiles -> members sharing them
    std::map<std::vector<std::string>, std::set<std::string>> distinct;
    for (const auto& [uid, perms] : input.profiles) {
        if (perms.empty()) continue;
        distinct[detail::sorted_vec(perms)].insert(uid);
    }

    std::vector<CandidateRole> out;
    int seq = 0;
    for (const auto& [perm_list, members] : distinct) {
        CandidateRole c;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%04d", ++seq);
        c.id = buf;
        c.permissions = std::set<std::string>(perm_list.begin(), perm_list.end());
        c.members = members;
        c.provenance = {Provenance::profile};
        c.coverage_score = detail::score_of(c);
        out.push_back(std::move(c));
    }

    std::vector<const std::pair<const std::vector<std::string>, std::set<std::string>>*> profiles;
    for (const auto& entry : distinct) profiles.push_back(&entry);

    std::map<std::vector<std::string>, CandidateRole> intersections;
    for (size_t a = 0; a < profiles.size(); ++a) {
        for (size_t b = a + 1; b < profiles.size(); ++b) {
            std::vector<std::string> inter;
            std::set_intersection(profiles[a]->first.begin(), profiles[a]->first.end(),
                                  profiles[b]->first.begin(), profiles[b]->first.end(),
                                  std::back_inserter(inter));
            if (static_cast<int>(inter.size()) < params.min_perms) continue;
            std::set<std::string> support = profiles[a]->second;
            support.insert(profiles[b]->second.begin(), profiles[b]->second.end());
            if (static_cast<int>(support.size()) < params.min_users) continue;
            if (intersections.count(inter)) continue;
            CandidateRole c;
            c.permissions = std::set<std::string>(inter.begin(), inter.end());
            for (const auto& [uid, perms] : input.profiles) {
                if (std::includes(perms.begin(), perms.end(), c.permissions.begin(),
                                  c.permissions.end())) {
                    c.members.insert(uid);
                }
            }
            c.provenance = {Provenance::intersection};
            c.coverage_score = detail::score_of(c);
            intersections.emplace(std::move(inter), std::move(c));
        }
    }
    seq = 0;
    for (auto& [perm_list, c] : intersections) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "I%04d", ++seq);
        c.id = buf;
        out.push_back(std::move(c));
    }
    return out;
}

/// Step 3: greedy cover. Repeatedly select, among candidates that still cover
/// at least one uncovered (user, permission) pair, the one with the highest
/// coverage_score, ties broken by lexicographically smallest sorted
/// permission-id list, then by id. Output order is selection order; every
/// pair ends covered because each distinct profile is itself a candidate.
inline CandidateList mine_bottom_up(const AnalysisInput& input, const MiningParams& params) {
    auto generated = enumerate_bottom_up_candidates(input, params);

    std::set<std::pair<std::string, std::string>> uncovered;
    for (const auto& [uid, perms] : input.profiles) {
        for (const auto& p : perms) uncovered.emplace(uid, p);
    }

    std::vector<bool> taken(generated.size(), false);
    std::vector<CandidateRole> selected;
    while (!uncovered.empty()) {
        int best = -1;
        for (size_t i = 0; i < generated.size(); ++i) {
            if (taken[i]) continue;
            const auto& c = generated[i];
            bool contributes = false;
            for (const auto& u : c.members) {
                for (const auto& p : c.permissions) {
                    if (uncovered.count({u, p})) {
                        contributes = true;
                        break;
                    }
                }
                if (contributes) break;
            }
            if (!contributes) continue;
            if (best < 0) {
                best = static_cast<int>(i);
                continue;
            }
            const auto& cur = generated[best];
            auto key = [](const CandidateRole& x) {
                return std::make_tuple(-x.coverage_score, detail::sorted_vec(x.permissions), x.id);
            };
            if (key(c) < key(cur)) best = static_cast<int>(i);
        }
        if (best < 0) break;  // nothing contributes; cannot occur with profile candidates present
        taken[best] = true;
        for (const auto& u : generated[best].members) {
            for (const auto& p : generated[best].permissions) uncovered.erase({u, p});
        }
        selected.push_back(generated[best]);
    }
    return {input.input_digest, std::move(selected)};
}

/// Top-down pass: one candidate per org unit whose subtree users share a
/// non-empty common permission core (intersection of their profiles).
inline CandidateList derive_top_down(const AnalysisInput& input) {
    std::vector<CandidateRole> out;
    for (const auto& [unit_id, unit] : input.org.units) {
        auto units = subtree_units(input.org, unit_id);
        std::set<std::string> members;
        for (const auto& [uid, rec] : input.org.users) {
            if (rec.org_unit && units.count(*rec.org_unit) && input.profiles.count(uid)) {
                members.insert(uid);
            }
        }
        if (members.empty()) continue;
        std::optional<std::set<std::string>> common;
        for (const auto& uid : members) {
            const auto& profile = input.profiles.at(uid);
            if (!common) {
                common = profile;
            } else {
                std::set<std::string> next;
                std::set_intersection(common->begin(), common->end(), profile.begin(), profile.end(),
                                      std::inserter(next, next.begin()));
                *common = std::move(next);
            }
        }
        if (!common || common->empty()) continue;
        CandidateRole c;
        c.id = "ORG-" + unit_id;
        c.permissions = std::move(*common);
        c.members = std::move(members);
        c.provenance = {Provenance::org_node};
        c.matched_org_unit = unit_id;
        c.coverage_score = detail::score_of(c);
        out.push_back(std::move(c));
    }
    return {input.input_digest, std::move(out)};
}

/// Match bottom-up candidates against the org view and merge duplicates.
///
/// A bottom-up candidate whose member set equals some org-node candidate's
/// member set is annotated with that unit; candidates without a natural home
/// keep a flag saying so. Candidates with identical permission sets merge:
/// members union, provenance accumulates, the smallest id survives. Output
/// preserves bottom-up selection order, then appends unmerged org-node
/// candidates in unit order.
inline std::vector<CandidateRole> reconcile(const CandidateList& bottom_up,
                                            const CandidateList& top_down) {
    if (bottom_up.input_digest != top_down.input_digest) {
        throw Error(ErrorCode::version_mismatch, "candidate lists come from different analysis inputs");
    }
    std::vector<CandidateRole> merged;
    std::map<std::vector<std::string>, size_t> by_perms;

    auto fold = [&](const CandidateRole& c) {
        auto key = detail::sorted_vec(c.permissions);
        auto it = by_perms.find(key);
        if (it == by_perms.end()) {
            by_perms.emplace(std::move(key), merged.size());
            merged.push_back(c);
            return;
        }
        CandidateRole& dst = merged[it->second];
        dst.members.insert(c.members.begin(), c.members.end());
        for (auto p : c.provenance) {
            if (std::find(dst.provenance.begin(), dst.provenance.end(), p) == dst.provenance.end()) {
                dst.provenance.push_back(p);
            }
        }
        std::sort(dst.provenance.begin(), dst.provenance.end());
        if (!dst.matched_org_unit) dst.matched_org_unit = c.matched_org_unit;
        if (c.id < dst.id) dst.id = c.id;
        dst.coverage_score = detail::score_of(dst);
    };

    for (const auto& c : bottom_up.candidates) {
        CandidateRole annotated = c;
        for (const auto& org_cand : top_down.candidates) {
            if (org_cand.members == c.members) {
                annotated.matched_org_unit = org_cand.matched_org_unit;
                break;
            }
        }
        fold(annotated);
    }
    for (const auto& c : top_down.candidates) fold(c);

    for (auto& c : merged) c.no_natural_home = !c.matched_org_unit.has_value();
    return merged;
}

// ---------------------------------------------------------------------------
// Analysis Catalogue
// ---------------------------------------------------------------------------

inline json analysis_catalogue_body(const std::vector<CandidateRole>& candidates,
                                    const AnalysisInput& input, const MiningParams& params,
                                    std::int64_t timestamp) {
    json profiles = json::object();
    for (const auto& [uid, perms] : input.profiles) profiles[uid] = perms;
    json observations = json::array();
    for (const auto& [rid, rule] : input.state.sod_rules) observations.push_back(rule);
    return json{{"params", params},
                {"profiles", profiles},
                {"candidates", candidates},
                {"org_snapshot", input.org},
                {"sod_observations", observations},
                {"input_digest", input.input_digest},
                {"timestamp", timestamp}};
}

inline int write_analysis_catalogue(Store& store, const std::vector<CandidateRole>& candidates,
                                    const AnalysisInput& input, const MiningParams& params,
                                    std::int64_t now) {
    return store.save(CatalogueKind::analysis, analysis_catalogue_body(candidates, input, params, now),
                      now);
}

inline std::vector<CandidateRole> candidates_from_catalogue(const json& body) {
    return body.at("candidates").get<std::vector<CandidateRole>>();
}

}  // namespace rolecycle
