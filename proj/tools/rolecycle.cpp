// rolecycle: role lifecycle management CLI.
//
// One subcommand per lifecycle process over a versioned store. Exit codes:
//   0 success / clean
//   1 findings present (SOD violations, deviations, verification failures)
//   2 usage or input error
//   3 authorization failure
//   4 store / integrity error
// Data goes to stdout, diagnostics to stderr. Mutating subcommands take the
// store's write lock, pass the admin-role gate and append exactly one audit
// record; read-only subcommands append none.

#include "CLI11.hpp"

#include "rolecycle/analysis.hpp"
#include "rolecycle/engineering.hpp"
#include "rolecycle/fixtures.hpp"
#include "rolecycle/maintenance.hpp"
#include "rolecycle/management.hpp"
#include "rolecycle/render.hpp"
#include "rolecycle/store.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rc = rolecycle;
using rc::json;

namespace {

int exit_code_for(rc::ErrorCode code) {
    switch (code) {
        case rc::ErrorCode::not_authorized:
            return 3;
        case rc::ErrorCode::sod_violation:
            return 1;
        case rc::ErrorCode::digest_mismatch:
        case rc::ErrorCode::integrity_failure:
        case rc::ErrorCode::store_write_failure:
        case rc::ErrorCode::invariant_violation:
        case rc::ErrorCode::non_canonicalizable:
            return 4;
        default:
            return 2;
    }
}

std::int64_t now_epoch() {
    if (const char* fixed = std::getenv("ROLECYCLE_NOW")) {
        return std::atoll(fixed);
    }
    return static_cast<std::int64_t>(std::time(nullptr));
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rc::Error(rc::ErrorCode::input_error, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw rc::Error(rc::ErrorCode::input_error, "invalid JSON in " + path);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw rc::Error(rc::ErrorCode::input_error, "cannot write " + path);
    out << content;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::set<std::string> csv_set(const std::string& s) {
    auto v = split_csv(s);
    return {v.begin(), v.end()};
}

std::string join(const std::set<std::string>& items, const std::string& sep = ",") {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : sep) + i;
    return out;
}
std::string join(const std::vector<std::string>& items, const std::string& sep = ",") {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : sep) + i;
    return out;
}

struct Ctx {
    std::string store_path;
    std::string env_name = "test";
    std::string actor;
    std::string format = "table";

    rc::Store open_store() const {
        if (store_path.empty()) {
            throw rc::Error(rc::ErrorCode::input_error,
                            "store root required (--store or ROLECYCLE_STORE)");
        }
        return rc::Store(store_path);
    }
    bool json_out() const { return format == "json"; }
    void require_actor() const {
        if (actor.empty()) {
            throw rc::Error(rc::ErrorCode::input_error, "--as <user> required for this command");
        }
    }
};

void emit(const Ctx& ctx, const json& doc, const std::string& table) {
    if (ctx.json_out()) {
        std::cout << rc::canonicalize(doc);
    } else {
        std::cout << table;
    }
}

rc::Environment load_env(const rc::Store& store, const std::string& name) {
    auto latest = store.latest_version(rc::CatalogueKind::environment, name);
    if (!latest) return rc::seed_environment(name);
    return store.load_body(rc::CatalogueKind::environment, latest, name).get<rc::Environment>();
}

int save_env(rc::Store& store, const rc::Environment& env, std::int64_t now) {
    return store.save(rc::CatalogueKind::environment, json(env), now, env.name);
}

rc::ConceptCatalogue load_concepts(const rc::Store& store) {
    auto latest = store.latest_version(rc::CatalogueKind::concept_model);
    if (!latest) return {};
    return rc::concept_catalogue_from_json(store.load_body(rc::CatalogueKind::concept_model));
}

int save_concepts(rc::Store& store, const rc::ConceptCatalogue& c, std::int64_t now) {
    return store.save(rc::CatalogueKind::concept_model, rc::concept_catalogue_to_json(c), now);
}

rc::RolesCatalogue load_roles_catalogue(const rc::Store& store, std::optional<int> version = {}) {
    auto v = version ? version : store.latest_version(rc::CatalogueKind::roles);
    if (!v) return {};
    return rc::roles_catalogue_from_body(store.load_body(rc::CatalogueKind::roles, v), *v);
}

const rc::ConceptEntry& find_entry(const rc::ConceptCatalogue& concepts, const std::string& id,
                                   int version) {
    auto it = concepts.find(id);
    if (it == concepts.end() || it->second.empty()) {
        throw rc::Error(rc::ErrorCode::unknown_entity, "concept entry " + id);
    }
    if (version == 0) return it->second.rbegin()->second;
    auto vit = it->second.find(version);
    if (vit == it->second.end()) {
        throw rc::Error(rc::ErrorCode::unknown_version,
                        "concept entry " + id + " has no version " + std::to_string(version));
    }
    return vit->second;
}

std::string concepts_digest(const rc::ConceptCatalogue& c) {
    return rc::canonical_digest(rc::concept_catalogue_to_json(c));
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

int cmd_fixtures_seed(const Ctx& ctx) {
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    std::int64_t now = now_epoch();
    rc::Environment env = rc::fixtures::seed_fixture_environment(ctx.env_name);
    int v = save_env(store, env, now);
    write_text_file((store.root() / "org.json").string(),
                    rc::canonicalize(rc::fixtures::demo_org_document()));
    store.append_audit(ctx.actor.empty() ? rc::kBootstrapUser : ctx.actor, "fixtures-seed",
                       {"environment:" + ctx.env_name + "@" + std::to_string(v)},
                       std::string(rc::kGenesisHash), rc::environment_digest(env));
    emit(ctx, json{{"environment", ctx.env_name}, {"version", v}},
         "seeded environment " + ctx.env_name + " (version " + std::to_string(v) + ")\n" +
             "sample org document written to " + (store.root() / "org.json").string() + "\n");
    return 0;
}

int cmd_analyze(const Ctx& ctx, const std::string& org_file) {
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::OrgSnapshot org = rc::org_snapshot_from_json(read_json_file(org_file));
    rc::AnalysisInput input = rc::ingest(env.state, org);

    std::vector<std::vector<std::string>> rows;
    json profiles = json::object();
    for (const auto& [uid, perms] : input.profiles) {
        rows.push_back({uid, std::to_string(perms.size()), join(perms)});
        profiles[uid] = perms;
    }
    emit(ctx, json{{"profiles", profiles}, {"input_digest", input.input_digest}},
         rc::render_table({"USER", "PERMS", "PROFILE"}, rows));
    return 0;
}

std::string candidates_table(const std::vector<rc::CandidateRole>& candidates) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : candidates) {
        std::string prov;
        for (auto p : c.provenance) prov += (prov.empty() ? "" : "+") + rc::to_string(p);
        rows.push_back({c.id, std::to_string(c.coverage_score), prov,
                        c.matched_org_unit.value_or("-"), join(c.members), join(c.permissions)});
    }
    return rc::render_table({"ID", "SCORE", "PROVENANCE", "ORG_UNIT", "MEMBERS", "PERMISSIONS"}, rows);
}

int cmd_mine(const Ctx& ctx, const std::string& org_file, int min_users, int min_perms) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);

    rc::OrgSnapshot org = rc::org_snapshot_from_json(read_json_file(org_file));
    rc::AnalysisInput input = rc::ingest(env.state, org);
    rc::MiningParams params{min_users, min_perms};
    auto bottom_up = rc::mine_bottom_up(input, params);
    auto top_down = rc::derive_top_down(input);
    auto merged = rc::reconcile(bottom_up, top_down);

    std::int64_t now = now_epoch();
    std::string before(rc::kGenesisHash);
    if (auto prev = store.latest_version(rc::CatalogueKind::analysis)) {
        before = store.load(rc::CatalogueKind::analysis, prev).header.body_digest;
    }
    int v = rc::write_analysis_catalogue(store, merged, input, params, now);
    std::string after = store.load(rc::CatalogueKind::analysis, v).header.body_digest;
    store.append_audit(ctx.actor, "mine", {"analysis@" + std::to_string(v)}, before, after);

    emit(ctx, json{{"analysis_version", v}, {"candidates", merged}},
         "analysis catalogue version " + std::to_string(v) + "\n" + candidates_table(merged));
    return 0;
}

int cmd_design(const Ctx& ctx, const std::string& entry_id, const std::string& candidate_id,
               int analysis_version, const std::string& role_id, const std::string& name,
               const std::string& category, const std::string& perms, const std::string& users,
               const std::string& responsibilities, const std::string& org_scope,
               const std::string& edges, const std::string& qualifier_org,
               const std::string& qualifier_job) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);
    rc::ConceptCatalogue concepts = load_concepts(store);
    std::string before = concepts_digest(concepts);

    if (role_id.empty()) throw rc::Error(rc::ErrorCode::input_error, "--role-id required");

    rc::RoleDesign design;
    design.role = rc::Role{role_id, name.empty() ? role_id : name,
                           category.empty() ? "general" : category, csv_set(responsibilities),
                           csv_set(org_scope), rc::RoleStatus::active};
    for (const auto& e : split_csv(edges)) {
        auto pos = e.find('>');
        if (pos == std::string::npos) {
            throw rc::Error(rc::ErrorCode::input_error, "edges use SENIOR>JUNIOR: " + e);
        }
        design.edges.emplace(e.substr(0, pos), e.substr(pos + 1));
    }

    rc::DesignOptions options;
    options.entry_id = entry_id.empty() ? role_id : entry_id;
    if (!qualifier_org.empty()) {
        options.qualifier = rc::MembershipQualifier{
            qualifier_org, qualifier_job.empty() ? std::nullopt : std::optional(qualifier_job)};
    }

    rc::ConceptEntry entry;
    if (!candidate_id.empty()) {
        int v = analysis_version;
        if (v == 0) {
            auto latest = store.latest_version(rc::CatalogueKind::analysis);
            if (!latest) throw rc::Error(rc::ErrorCode::unknown_version, "no analysis catalogue yet");
            v = *latest;
        }
        auto body = store.load_body(rc::CatalogueKind::analysis, v);
        auto candidates = rc::candidates_from_catalogue(body);
        auto cit = std::find_if(candidates.begin(), candidates.end(),
                                [&](const rc::CandidateRole& c) { return c.id == candidate_id; });
        if (cit == candidates.end()) {
            throw rc::Error(rc::ErrorCode::unknown_entity,
                            "candidate " + candidate_id + " in analysis version " + std::to_string(v));
        }
        entry = rc::design_from_candidate(*cit, v, design.role, env.state, options);
        if (!perms.empty()) {
            entry.design.permissions = csv_set(perms);
        }
        entry.design.edges = design.edges;
        if (!users.empty()) entry.candidate_users = csv_set(users);
    } else {
        design.permissions = csv_set(perms);
        entry = rc::design_role(design, csv_set(users), env.state, options);
    }

    // existing ids: edit the draft in place, or fork a new version
    if (const rc::ConceptEntry* latest = rc::latest_entry(concepts, entry.id)) {
        if (latest->status == rc::ConceptStatus::draft) {
            entry.version = latest->version;
        } else {
            entry.version = latest->version + 1;
        }
    }
    concepts = rc::catalogue_upsert(std::move(concepts), entry);
    std::int64_t now = now_epoch();
    int v = save_concepts(store, concepts, now);
    store.append_audit(ctx.actor, "design",
                       {"concept:" + entry.id + "@" + std::to_string(entry.version)}, before,
                       concepts_digest(concepts));

    emit(ctx, json{{"entry", entry}, {"concept_catalogue_version", v}},
         "entry " + entry.id + " version " + std::to_string(entry.version) + " (draft)\n");
    return 0;
}

int cmd_prototype(const Ctx& ctx, const std::string& entry_id, int version) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);
    rc::ConceptCatalogue concepts = load_concepts(store);
    std::string before = concepts_digest(concepts);

    rc::ConceptEntry entry = find_entry(concepts, entry_id, version);
    auto result = rc::prototype_role(entry, env.state);
    concepts = rc::catalogue_upsert(std::move(concepts), result.entry);
    save_concepts(store, concepts, now_epoch());
    store.append_audit(ctx.actor, "prototype",
                       {"concept:" + entry.id + "@" + std::to_string(entry.version)}, before,
                       concepts_digest(concepts));

    int allowed = 0, total = 0;
    for (const auto& u : result.entry.candidate_users) {
        for (const auto& p : result.entry.design.permissions) {
            ++total;
            if (rc::check_access(result.sandbox, u, p).allowed) ++allowed;
        }
    }
    emit(ctx,
         json{{"entry", result.entry},
              {"sandbox",
               json{{"roles", result.sandbox.roles.size()},
                    {"assignments", result.sandbox.assignments.size()},
                    {"candidate_access_allowed", allowed},
                    {"candidate_access_checked", total}}}},
         "entry " + entry.id + " version " + std::to_string(entry.version) + " prototyped\n" +
             "sandbox: " + std::to_string(result.sandbox.roles.size()) + " roles, " +
             std::to_string(result.sandbox.assignments.size()) + " assignments; candidate access " +
             std::to_string(allowed) + "/" + std::to_string(total) + " allowed\n");
    return 0;
}

std::string verification_table(const rc::VerificationReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : report.checks) {
        rows.push_back({c.name, c.passed ? "pass" : "FAIL", c.details});
    }
    return rc::render_table({"CHECK", "RESULT", "DETAILS"}, rows);
}

int cmd_verify(const Ctx& ctx, const std::string& entry_id, int version, const std::string& org_file) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);
    rc::ConceptCatalogue concepts = load_concepts(store);
    std::string before = concepts_digest(concepts);

    rc::ConceptEntry entry = find_entry(concepts, entry_id, version);
    rc::DirectoryState sandbox = rc::build_sandbox(entry, env.state);
    rc::OrgSnapshot org;
    bool have_org = false;
    if (!org_file.empty()) {
        org = rc::org_snapshot_from_json(read_json_file(org_file));
        have_org = true;
    }
    rc::VerifyContext vctx{env.state, have_org ? &org : nullptr, &concepts};
    auto result = rc::verify_role(entry, sandbox, vctx);
    if (result.report.passed) {
        concepts = rc::catalogue_upsert(std::move(concepts), result.entry);
        save_concepts(store, concepts, now_epoch());
        store.append_audit(ctx.actor, "verify",
                           {"concept:" + entry.id + "@" + std::to_string(entry.version)}, before,
                           concepts_digest(concepts));
    }
    emit(ctx, json{{"report", result.report}, {"entry_status", rc::to_string(result.entry.status)}},
         verification_table(result.report) +
             (result.report.passed ? "entry verified\n" : "verification failed; entry unchanged\n"));
    return result.report.passed ? 0 : 1;
}

int cmd_signoff(const Ctx& ctx, const std::string& entry_id, int version) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::ConceptCatalogue concepts = load_concepts(store);
    std::string before = concepts_digest(concepts);

    rc::ConceptEntry entry = find_entry(concepts, entry_id, version);
    rc::ConceptEntry signed_entry = rc::signoff(entry, env.state, ctx.actor);
    concepts = rc::catalogue_upsert(std::move(concepts), signed_entry);
    int v = save_concepts(store, concepts, now_epoch());
    if (signed_entry.lineage) {
        store.add_analysis_crossref(signed_entry.lineage->analysis_version,
                                    signed_entry.lineage->candidate_id, signed_entry.id,
                                    signed_entry.version);
    }
    store.append_audit(ctx.actor, "signoff",
                       {"concept:" + entry.id + "@" + std::to_string(entry.version)}, before,
                       concepts_digest(concepts));
    emit(ctx, json{{"entry", signed_entry}, {"concept_catalogue_version", v}},
         "entry " + entry.id + " version " + std::to_string(entry.version) + " signed off\n");
    return 0;
}

int cmd_metrics(const Ctx& ctx, const std::string& entry_id, int version) {
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::ConceptCatalogue concepts = load_concepts(store);
    rc::ConceptEntry entry = find_entry(concepts, entry_id, version);
    rc::QualityMetrics m = rc::compute_quality_metrics(entry, env.state, &concepts);

    std::vector<std::vector<std::string>> rows = {
        {"user_count", std::to_string(m.user_count)},
        {"permission_count", std::to_string(m.permission_count)},
        {"hierarchy_depth", std::to_string(m.hierarchy_depth)},
        {"max_similarity", std::to_string(m.max_similarity.num) + "/" + std::to_string(m.max_similarity.den)},
        {"sod_adjacent", m.sod_adjacent ? "yes" : "no"},
        {"violation_count", std::to_string(m.violation_count)},
    };
    emit(ctx, json{{"metrics", m}}, rc::render_table({"METRIC", "VALUE"}, rows));
    return 0;
}

std::string changes_table(const rc::ChangeSet& changes) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : changes) rows.push_back({rc::to_string(c.kind), c.subject});
    return rc::render_table({"CHANGE", "SUBJECT"}, rows);
}

int cmd_deploy(const Ctx& ctx, const std::string& bundle_file, const std::string& out_bundle,
               int catalogue_version, const std::string& reference_env, bool export_only) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);

    std::int64_t now = now_epoch();
    rc::DeploymentBundle bundle;
    if (!bundle_file.empty()) {
        bundle = rc::bundle_from_json(read_json_file(bundle_file));
    } else if (catalogue_version > 0) {
        bundle = rc::export_bundle(load_roles_catalogue(store, catalogue_version));
    } else {
        // refresh the roles catalogue from signed-off concepts before exporting
        rc::ConceptCatalogue concepts = load_concepts(store);
        rc::RolesCatalogue prev = load_roles_catalogue(store);
        rc::Environment reference =
            reference_env == ctx.env_name ? env : load_env(store, reference_env);
        rc::RolesCatalogue updated =
            rc::update_catalogue_from_concepts(prev, concepts, reference.state);
        if (updated.entries != prev.entries) {
            int v = store.save(rc::CatalogueKind::roles, rc::roles_catalogue_body(updated), now);
            updated.version = v;
        }
        bundle = rc::export_bundle(updated);
    }
    if (!out_bundle.empty()) {
        write_text_file(out_bundle, rc::canonicalize(rc::bundle_to_json(bundle)));
    }
    if (export_only) {
        store.append_audit(ctx.actor, "deploy-export",
                           {"roles@" + std::to_string(bundle.source_version)}, bundle.digest,
                           bundle.digest);
        emit(ctx, json{{"bundle_digest", bundle.digest}, {"source_version", bundle.source_version}},
             "bundle exported (source version " + std::to_string(bundle.source_version) + ", digest " +
                 bundle.digest.substr(0, 12) + ")\n");
        return 0;
    }

    std::string before = rc::environment_digest(env);
    rc::ApplyResult result = rc::apply(bundle, std::move(env), ctx.actor);
    int ev = save_env(store, result.environment, now);
    store.append_audit(ctx.actor, "deploy",
                       {"environment:" + ctx.env_name + "@" + std::to_string(ev),
                        "roles@" + std::to_string(bundle.source_version),
                        "changes:" + std::to_string(result.applied.size())},
                       before, rc::environment_digest(result.environment));
    emit(ctx,
         json{{"changes", result.applied},
              {"environment_version", ev},
              {"catalogue_version", bundle.source_version}},
         changes_table(result.applied) + "applied " + std::to_string(result.applied.size()) +
             " change(s) to " + ctx.env_name + "\n");
    return 0;
}

int cmd_diff(const Ctx& ctx, const std::string& bundle_file, int catalogue_version) {
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::DeploymentBundle bundle;
    if (!bundle_file.empty()) {
        bundle = rc::bundle_from_json(read_json_file(bundle_file));
    } else {
        bundle = rc::export_bundle(load_roles_catalogue(
            store, catalogue_version > 0 ? std::optional<int>(catalogue_version) : std::nullopt));
    }
    rc::ChangeSet changes = rc::diff(bundle, env);
    emit(ctx, json{{"changes", changes}},
         changes.empty() ? "environment matches the bundle\n" : changes_table(changes));
    return 0;
}

int cmd_assign(const Ctx& ctx, const std::string& user, const std::string& role, bool enforce_sod) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    std::string before = rc::environment_digest(env);
    auto result = rc::admin_assign(std::move(env), user, role, ctx.actor, enforce_sod);
    int v = save_env(store, result.environment, now_epoch());
    store.append_audit(ctx.actor, "assign",
                       {"user:" + user, "role:" + role,
                        "environment:" + ctx.env_name + "@" + std::to_string(v)},
                       before, rc::environment_digest(result.environment));
    if (!result.warnings.empty()) {
        std::cerr << "warning: assignment creates " << result.warnings.size()
                  << " SOD violation(s): " << json(result.warnings).dump() << "\n";
    }
    emit(ctx, json{{"assigned", true}, {"violations", result.warnings}},
         "assigned " + role + " to " + user + "\n");
    return result.warnings.empty() ? 0 : 1;
}

int cmd_revoke(const Ctx& ctx, const std::string& user, const std::string& role) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    std::string before = rc::environment_digest(env);
    env = rc::admin_revoke(std::move(env), user, role, ctx.actor);
    int v = save_env(store, env, now_epoch());
    store.append_audit(ctx.actor, "revoke",
                       {"user:" + user, "role:" + role,
                        "environment:" + ctx.env_name + "@" + std::to_string(v)},
                       before, rc::environment_digest(env));
    emit(ctx, json{{"revoked", true}}, "revoked " + role + " from " + user + "\n");
    return 0;
}

int cmd_split(const Ctx& ctx, const std::string& role, const std::string& p1, const std::string& p2,
              const std::string& id1, const std::string& id2, const std::string& member_map) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::RolesCatalogue catalogue = load_roles_catalogue(store);

    rc::SplitSpec spec;
    spec.p1 = csv_set(p1);
    spec.p2 = csv_set(p2);
    if (!id1.empty()) spec.id1 = id1;
    if (!id2.empty()) spec.id2 = id2;
    for (const auto& kv : split_csv(member_map)) {
        auto pos = kv.find('=');
        if (pos == std::string::npos) {
            throw rc::Error(rc::ErrorCode::input_error, "member map uses USER=1|2: " + kv);
        }
        spec.membership[kv.substr(0, pos)] = std::atoi(kv.substr(pos + 1).c_str());
    }

    std::string before = rc::environment_digest(env);
    bool had_entry = catalogue.entries.count(role) != 0;
    auto result = rc::split_role(std::move(env), std::move(catalogue), role, spec, ctx.actor);
    std::int64_t now = now_epoch();
    int v = save_env(store, result.environment, now);
    if (had_entry) {
        int cv = store.save(rc::CatalogueKind::roles, rc::roles_catalogue_body(result.catalogue), now);
        result.catalogue.version = cv;
    }
    store.append_audit(ctx.actor, "split",
                       {"role:" + role, "role:" + result.role1, "role:" + result.role2,
                        "environment:" + ctx.env_name + "@" + std::to_string(v)},
                       before, rc::environment_digest(result.environment));
    emit(ctx, json{{"archived", role}, {"roles", json::array({result.role1, result.role2})}},
         "split " + role + " into " + result.role1 + " and " + result.role2 + "\n");
    return 0;
}

int cmd_merge(const Ctx& ctx, const std::string& roles_csv, const std::string& new_id,
              const std::string& name) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    auto lock = store.acquire_write_lock();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::RolesCatalogue catalogue = load_roles_catalogue(store);

    auto sources = split_csv(roles_csv);
    std::string before = rc::environment_digest(env);
    bool had_entry = std::any_of(sources.begin(), sources.end(), [&](const std::string& r) {
        return catalogue.entries.count(r) != 0;
    });
    auto result = rc::merge_roles(std::move(env), std::move(catalogue), sources, new_id, ctx.actor,
                                  name.empty() ? std::nullopt : std::optional(name));
    std::int64_t now = now_epoch();
    int v = save_env(store, result.environment, now);
    if (had_entry) {
        store.save(rc::CatalogueKind::roles, rc::roles_catalogue_body(result.catalogue), now);
    }
    store.append_audit(ctx.actor, "merge",
                       {"roles:" + roles_csv, "role:" + new_id,
                        "environment:" + ctx.env_name + "@" + std::to_string(v)},
                       before, rc::environment_digest(result.environment));
    emit(ctx, json{{"role", new_id}, {"sources", sources}},
         "merged " + roles_csv + " into " + new_id + "\n");
    return 0;
}

int cmd_check_access(const Ctx& ctx, const std::string& user, const std::string& perm,
                     const std::string& org) {
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    auto decision = rc::check_access(env.state, user, perm,
                                     org.empty() ? std::nullopt : std::optional(org));
    std::vector<std::vector<std::string>> rows = {
        {"decision", decision.allowed ? "allow" : "deny"},
        {"reason", decision.reason},
        {"witness_role", decision.witness_role.value_or("-")},
        {"witness_source", decision.witness_source.value_or("-")},
    };
    emit(ctx, json(decision), rc::render_table({"FIELD", "VALUE"}, rows));
    return 0;
}

std::string violations_table(const std::vector<rc::SodViolation>& violations) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& v : violations) {
        rows.push_back({v.rule, v.user, join(v.witnesses), join(v.via)});
    }
    return rc::render_table({"RULE", "USER", "WITNESSES", "VIA"}, rows);
}

int cmd_audit_sod(const Ctx& ctx) {
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    auto violations = rc::audit_sod(env.state);
    emit(ctx, json{{"violations", violations}}, violations_table(violations));
    return violations.empty() ? 0 : 1;
}

std::string deviations_table(const rc::MaintenanceReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& d : report.deviations) {
        rows.push_back({rc::to_string(d.severity), rc::to_string(d.kind), d.subject,
                        rc::to_string(d.route)});
    }
    return rc::render_table({"SEVERITY", "KIND", "SUBJECT", "ROUTE"}, rows);
}

struct DetectArgs {
    std::string org_file;
    std::string usage_log;
    std::int64_t window = 7776000;
    std::int64_t since = 0;
    std::string on_event;
    int catalogue_version = 0;
};

rc::MaintenanceReport run_detection(const Ctx& ctx, rc::Store& store, const DetectArgs& args) {
    rc::Environment env = load_env(store, ctx.env_name);
    rc::OrgSnapshot org = rc::org_snapshot_from_json(read_json_file(args.org_file));
    rc::RolesCatalogue catalogue = load_roles_catalogue(
        store, args.catalogue_version > 0 ? std::optional<int>(args.catalogue_version) : std::nullopt);
    rc::ConceptCatalogue concepts = load_concepts(store);
    std::vector<rc::UsageRecord> usage;
    bool have_usage = false;
    if (!args.usage_log.empty()) {
        std::ifstream in(args.usage_log, std::ios::binary);
        if (!in) throw rc::Error(rc::ErrorCode::input_error, "cannot open " + args.usage_log);
        usage = rc::parse_usage_log(in);
        have_usage = true;
    }
    rc::MaintenanceParams params;
    params.unused_window_secs = args.window;
    if (args.since > 0) params.since = args.since;
    return rc::detect_deviations(env, catalogue, concepts, org, have_usage ? &usage : nullptr, params,
                                 args.on_event.empty() ? rc::TriggerKind::periodic
                                                       : rc::TriggerKind::event,
                                 now_epoch());
}

int cmd_detect(const Ctx& ctx, const DetectArgs& args) {
    rc::Store store = ctx.open_store();
    rc::MaintenanceReport report = run_detection(ctx, store, args);
    emit(ctx, json(report),
         deviations_table(report) + std::to_string(report.deviations.size()) + " deviation(s)\n");
    return report.has_at_or_above(rc::Severity::warning) ? 1 : 0;
}

int cmd_plan(const Ctx& ctx, const std::string& report_file, const DetectArgs& args,
             const std::string& out_file) {
    ctx.require_actor();
    rc::Store store = ctx.open_store();
    rc::Environment env = load_env(store, ctx.env_name);
    rc::require_admin(env.state, ctx.actor, rc::kFunctionalAdministrator);

    rc::MaintenanceReport report;
    if (!report_file.empty()) {
        report = read_json_file(report_file).get<rc::MaintenanceReport>();
    } else {
        if (args.org_file.empty()) {
            throw rc::Error(rc::ErrorCode::input_error, "--report or --org-file required");
        }
        report = run_detection(ctx, store, args);
    }
    rc::RolesCatalogue catalogue = load_roles_catalogue(store);
    rc::ConceptCatalogue concepts = load_concepts(store);
    auto tasks = rc::plan_redefinition(report, catalogue, concepts);

    json doc{{"tasks", tasks}};
    if (!out_file.empty()) write_text_file(out_file, rc::canonicalize(doc));
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : tasks) {
        rows.push_back({t.id, rc::to_string(t.deviation_kind), t.deviation_subject,
                        rc::to_string(t.route)});
    }
    emit(ctx, doc, rc::render_table({"TASK", "DEVIATION", "SUBJECT", "ROUTE"}, rows));
    return 0;
}

int cmd_audit_log_verify(const Ctx& ctx) {
    rc::Store store = ctx.open_store();
    auto status = store.verify_chain();
    auto records = store.read_audit();
    if (!status.valid) {
        std::cerr << "audit chain broken at seq " << status.broken_at << "\n";
        emit(ctx, json{{"valid", false}, {"broken_at", status.broken_at}}, "");
        return 4;
    }
    emit(ctx, json{{"valid", true}, {"records", records.size()}},
         "audit chain valid (" + std::to_string(records.size()) + " records)\n");
    return 0;
}

int cmd_history(const Ctx& ctx, const std::string& kind) {
    rc::Store store = ctx.open_store();
    std::vector<std::vector<std::string>> rows;
    json versions = json::array();
    auto add = [&](rc::CatalogueKind k, const std::string& env_name) {
        for (const auto& h : store.list_versions(k, env_name)) {
            std::string label = rc::to_string(k) + (env_name.empty() ? "" : ":" + env_name);
            rows.push_back({label, std::to_string(h.version), std::to_string(h.created_at),
                            h.parent_version ? std::to_string(*h.parent_version) : "-",
                            h.body_digest.substr(0, 12)});
            json hj;
            rc::to_json(hj, h);
            hj["store_kind"] = label;
            versions.push_back(hj);
        }
    };
    if (kind.empty() || kind == "analysis") add(rc::CatalogueKind::analysis, "");
    if (kind.empty() || kind == "concept") add(rc::CatalogueKind::concept_model, "");
    if (kind.empty() || kind == "roles") add(rc::CatalogueKind::roles, "");
    if (kind.empty() || kind == "environment") {
        for (const auto& name : store.environment_names()) {
            if (kind == "environment" && !ctx.env_name.empty() && name != ctx.env_name) continue;
            add(rc::CatalogueKind::environment, name);
        }
    }
    emit(ctx, json{{"versions", versions}},
         rc::render_table({"KIND", "VERSION", "CREATED_AT", "PARENT", "DIGEST"}, rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rolecycle: RBAC engine and roles lifecycle management toolkit"};
    app.require_subcommand(1);

    Ctx ctx;
    if (const char* env_store = std::getenv("ROLECYCLE_STORE")) ctx.store_path = env_store;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--store", ctx.store_path, "store root directory")
            ->envname("ROLECYCLE_STORE");
        sub->add_option("--env", ctx.env_name, "target environment name")->capture_default_str();
        sub->add_option("--as", ctx.actor, "acting user for authorization and audit");
        sub->add_option("--format", ctx.format, "output format: table or json")
            ->check(CLI::IsMember({"table", "json"}))
            ->capture_default_str();
        return sub;
    };

    int rc_code = 0;
    auto run = [&](auto&& fn) {
        return [&, fn]() { rc_code = fn(); };
    };

    // fixtures seed
    auto* fixtures_cmd = app.add_subcommand("fixtures", "test fixtures");
    auto* seed = add_common(fixtures_cmd->add_subcommand("seed", "seed the demo directory"));
    seed->callback(run([&] { return cmd_fixtures_seed(ctx); }));

    // analyze
    std::string an_org;
    auto* analyze = add_common(app.add_subcommand("analyze", "ingest org + directory, print profiles"));
    analyze->add_option("--org-file", an_org, "organization JSON document")->required();
    analyze->callback(run([&] { return cmd_analyze(ctx, an_org); }));

    // mine
    std::string mine_org;
    int mine_min_users = 2, mine_min_perms = 2;
    auto* mine = add_common(app.add_subcommand("mine", "mine candidate roles, write analysis catalogue"));
    mine->add_option("--org-file", mine_org, "organization JSON document")->required();
    mine->add_option("--min-users", mine_min_users, "minimum combined support for intersections")
        ->capture_default_str();
    mine->add_option("--min-perms", mine_min_perms, "minimum intersection size")->capture_default_str();
    mine->callback(run([&] { return cmd_mine(ctx, mine_org, mine_min_users, mine_min_perms); }));

    // design
    std::string d_entry, d_candidate, d_role, d_name, d_category, d_perms, d_users, d_resps,
        d_scope, d_edges, d_qorg, d_qjob;
    int d_av = 0;
    auto* design = add_common(app.add_subcommand("design", "create or revise a draft concept entry"));
    design->add_option("--entry", d_entry, "concept entry id (defaults to role id)");
    design->add_option("--candidate", d_candidate, "source candidate id from the analysis catalogue");
    design->add_option("--analysis-version", d_av, "analysis catalogue version (default latest)");
    design->add_option("--role-id", d_role, "role id to design")->required();
    design->add_option("--name", d_name, "role display name");
    design->add_option("--category", d_category, "role category");
    design->add_option("--perms", d_perms, "comma-separated permission selection");
    design->add_option("--users", d_users, "comma-separated candidate users");
    design->add_option("--responsibilities", d_resps, "comma-separated responsibility ids");
    design->add_option("--org-scope", d_scope, "comma-separated org unit ids (empty = global)");
    design->add_option("--edges", d_edges, "hierarchy edges SENIOR>JUNIOR,...");
    design->add_option("--qualifier-org", d_qorg, "membership qualifier org unit");
    design->add_option("--qualifier-job", d_qjob, "membership qualifier job function");
    design->callback(run([&] {
        return cmd_design(ctx, d_entry, d_candidate, d_av, d_role, d_name, d_category, d_perms,
                          d_users, d_resps, d_scope, d_edges, d_qorg, d_qjob);
    }));

    // prototype
    std::string p_entry;
    int p_version = 0;
    auto* prototype = add_common(app.add_subcommand("prototype", "build a sandbox for a draft entry"));
    prototype->add_option("--entry", p_entry, "concept entry id")->required();
    prototype->add_option("--version", p_version, "entry version (default latest)");
    prototype->callback(run([&] { return cmd_prototype(ctx, p_entry, p_version); }));

    // verify
    std::string v_entry, v_org;
    int v_version = 0;
    auto* verify = add_common(app.add_subcommand("verify", "run verification checks on a prototype"));
    verify->add_option("--entry", v_entry, "concept entry id")->required();
    verify->add_option("--version", v_version, "entry version (default latest)");
    verify->add_option("--org-file", v_org, "organization JSON document (for membership qualifiers)");
    verify->callback(run([&] { return cmd_verify(ctx, v_entry, v_version, v_org); }));

    // signoff
    std::string s_entry;
    int s_version = 0;
    auto* so = add_common(app.add_subcommand("signoff", "sign off a verified entry"));
    so->add_option("--entry", s_entry, "concept entry id")->required();
    so->add_option("--version", s_version, "entry version (default latest)");
    so->callback(run([&] { return cmd_signoff(ctx, s_entry, s_version); }));

    // metrics
    std::string m_entry;
    int m_version = 0;
    auto* metrics = add_common(app.add_subcommand("metrics", "quality metrics for a concept entry"));
    metrics->add_option("--entry", m_entry, "concept entry id")->required();
    metrics->add_option("--version", m_version, "entry version (default latest)");
    metrics->callback(run([&] { return cmd_metrics(ctx, m_entry, m_version); }));

    // deploy
    std::string dep_bundle, dep_out, dep_ref = "test";
    int dep_cv = 0;
    bool dep_export_only = false;
    auto* deploy = add_common(app.add_subcommand("deploy", "export the roles catalogue and apply it"));
    deploy->add_option("--bundle", dep_bundle, "apply a previously exported bundle file");
    deploy->add_option("--out-bundle", dep_out, "also write the bundle to this file");
    deploy->add_option("--catalogue-version", dep_cv, "deploy a specific roles catalogue version");
    deploy->add_option("--reference-env", dep_ref,
                       "environment supplying permission definitions when refreshing the catalogue")
        ->capture_default_str();
    deploy->add_flag("--export-only", dep_export_only, "refresh and export without applying");
    deploy->callback(run([&] {
        return cmd_deploy(ctx, dep_bundle, dep_out, dep_cv, dep_ref, dep_export_only);
    }));

    // diff
    std::string diff_bundle;
    int diff_cv = 0;
    auto* diffc = add_common(app.add_subcommand("diff", "changes a deploy would make"));
    diffc->add_option("--bundle", diff_bundle, "bundle file (default: stored roles catalogue)");
    diffc->add_option("--catalogue-version", diff_cv, "roles catalogue version (default latest)");
    diffc->callback(run([&] { return cmd_diff(ctx, diff_bundle, diff_cv); }));

    // assign / revoke
    std::string as_user, as_role;
    bool as_enforce = false;
    auto* assign = add_common(app.add_subcommand("assign", "assign a role to a user"));
    assign->add_option("--user", as_user, "user id")->required();
    assign->add_option("--role", as_role, "role id")->required();
    assign->add_flag("--enforce-sod", as_enforce, "reject the assignment on SOD violations");
    assign->callback(run([&] { return cmd_assign(ctx, as_user, as_role, as_enforce); }));

    std::string rv_user, rv_role;
    auto* revoke = add_common(app.add_subcommand("revoke", "revoke a role from a user"));
    revoke->add_option("--user", rv_user, "user id")->required();
    revoke->add_option("--role", rv_role, "role id")->required();
    revoke->callback(run([&] { return cmd_revoke(ctx, rv_user, rv_role); }));

    // split / merge
    std::string sp_role, sp_p1, sp_p2, sp_id1, sp_id2, sp_map;
    auto* split = add_common(app.add_subcommand("split", "split a role's permissions into two roles"));
    split->add_option("--role", sp_role, "role to split")->required();
    split->add_option("--p1", sp_p1, "permissions for the first half")->required();
    split->add_option("--p2", sp_p2, "permissions for the second half")->required();
    split->add_option("--id1", sp_id1, "id for the first new role");
    split->add_option("--id2", sp_id2, "id for the second new role");
    split->add_option("--member-map", sp_map, "USER=1|2 pairs pinning members to one half");
    split->callback(run([&] { return cmd_split(ctx, sp_role, sp_p1, sp_p2, sp_id1, sp_id2, sp_map); }));

    std::string mg_roles, mg_new, mg_name;
    auto* merge = add_common(app.add_subcommand("merge", "merge roles into a single role"));
    merge->add_option("--roles", mg_roles, "comma-separated source roles")->required();
    merge->add_option("--new-id", mg_new, "id of the merged role")->required();
    merge->add_option("--name", mg_name, "display name of the merged role");
    merge->callback(run([&] { return cmd_merge(ctx, mg_roles, mg_new, mg_name); }));

    // check-access
    std::string ca_user, ca_perm, ca_org;
    auto* check = add_common(app.add_subcommand("check-access", "evaluate an access decision"));
    check->add_option("--user", ca_user, "user id")->required();
    check->add_option("--perm", ca_perm, "permission id")->required();
    check->add_option("--org", ca_org, "org unit context");
    check->callback(run([&] { return cmd_check_access(ctx, ca_user, ca_perm, ca_org); }));

    // audit-sod
    auto* audit_sod_cmd = add_common(app.add_subcommand("audit-sod", "audit the whole directory"));
    audit_sod_cmd->callback(run([&] { return cmd_audit_sod(ctx); }));

    // detect-deviations
    DetectArgs det;
    auto* detect = add_common(app.add_subcommand("detect-deviations", "find drift and violations"));
    detect->add_option("--org-file", det.org_file, "organization JSON document")->required();
    detect->add_option("--usage-log", det.usage_log, "newline-delimited usage records");
    detect->add_option("--window", det.window, "unused-role window in seconds")->capture_default_str();
    detect->add_option("--since", det.since, "drop usage records older than this epoch");
    detect->add_option("--on-event", det.on_event, "run as an event trigger (names the event)");
    detect->add_option("--catalogue-version", det.catalogue_version,
                       "roles catalogue version (default latest)");
    detect->callback(run([&] { return cmd_detect(ctx, det); }));

    // plan-redefinition
    DetectArgs plan_det;
    std::string plan_report, plan_out;
    auto* plan =
        add_common(app.add_subcommand("plan-redefinition", "turn a deviation report into tasks"));
    plan->add_option("--report", plan_report, "deviation report JSON (from detect-deviations)");
    plan->add_option("--org-file", plan_det.org_file, "organization JSON document (inline detection)");
    plan->add_option("--usage-log", plan_det.usage_log, "newline-delimited usage records");
    plan->add_option("--window", plan_det.window, "unused-role window in seconds")
        ->capture_default_str();
    plan->add_option("--since", plan_det.since, "drop usage records older than this epoch");
    plan->add_option("--out", plan_out, "write tasks to this file");
    plan->callback(run([&] { return cmd_plan(ctx, plan_report, plan_det, plan_out); }));

    // audit-log verify
    auto* audit_log = app.add_subcommand("audit-log", "audit log operations");
    auto* chain = add_common(audit_log->add_subcommand("verify", "verify the hash chain"));
    chain->callback(run([&] { return cmd_audit_log_verify(ctx); }));

    // history
    std::string hist_kind;
    auto* history = add_common(app.add_subcommand("history", "list catalogue versions"));
    history->add_option("--kind", hist_kind, "analysis|concept|roles|environment (default all)")
        ->check(CLI::IsMember({"analysis", "concept", "roles", "environment"}));
    history->callback(run([&] { return cmd_history(ctx, hist_kind); }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const rc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc_code;
}
