#pragma once

#include "rolecycle/canonical.hpp"
#include "rolecycle/errors.hpp"
#include "rolecycle/sha256.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rolecycle {

namespace fs = std::filesystem;

enum class CatalogueKind { analysis, concept_model, roles, environment };

inline std::string to_string(CatalogueKind k) {
    switch (k) {
        case CatalogueKind::analysis: return "analysis";
        case CatalogueKind::concept_model: return "concept";
        case CatalogueKind::roles: return "roles";
        case CatalogueKind::environment: return "environment";
    }
    return "analysis";
}
inline CatalogueKind catalogue_kind_from_string(const std::string& s) {
    if (s == "analysis") return CatalogueKind::analysis;
    if (s == "concept") return CatalogueKind::concept_model;
    if (s == "roles") return CatalogueKind::roles;
    if (s == "environment") return CatalogueKind::environment;
    throw Error(ErrorCode::input_error, "bad catalogue kind: " + s);
}

struct VersionHeader {
    int format_version = 1;
    CatalogueKind kind = CatalogueKind::analysis;
    int version = 0;
    std::optional<int> parent_version;
    std::int64_t created_at = 0;
    std::string body_digest;
};

inline void to_json(json& j, const VersionHeader& h) {
    j = json{{"format_version", h.format_version},
             {"kind", to_string(h.kind)},
             {"version", h.version},
             {"parent_version", h.parent_version ? json(*h.parent_version) : json(nullptr)},
             {"created_at", h.created_at},
             {"body_digest", h.body_digest}};
}
inline void from_json(const json& j, VersionHeader& h) {
    h.format_version = j.at("format_version").get<int>();
    h.kind = catalogue_kind_from_string(j.at("kind").get<std::string>());
    h.version = j.at("version").get<int>();
    h.parent_version = j.at("parent_version").is_null()
                           ? std::nullopt
                           : std::optional<int>(j.at("parent_version").get<int>());
    h.created_at = j.at("created_at").get<std::int64_t>();
    h.body_digest = j.at("body_digest").get<std::string>();
}

struct AuditRecord {
    std::int64_t seq = 0;
    std::string actor;
    std::string operation;
    std::vector<std::string> subjects;
    std::string before_digest;
    std::string after_digest;
    std::string prev_record_hash;
    std::string record_hash;
};

inline void to_json(json& j, const AuditRecord& r) {
    j = json{{"seq", r.seq},
             {"actor", r.actor},
             {"operation", r.operation},
             {"subjects", r.subjects},
             {"before_digest", r.before_digest},
             {"after_digest", r.after_digest},
             {"prev_record_hash", r.prev_record_hash},
             {"record_hash", r.record_hash}};
}
inline void from_json(const json& j, AuditRecord& r) {
    r.seq = j.at("seq").get<std::int64_t>();
    r.actor = j.at("actor").get<std::string>();
    r.operation = j.at("operation").get<std::string>();
    r.subjects = j.at("subjects").get<std::vector<std::string>>();
    r.before_digest = j.at("before_digest").get<std::string>();
    r.after_digest = j.at("after_digest").get<std::string>();
    r.prev_record_hash = j.at("prev_record_hash").get<std::string>();
    r.record_hash = j.at("record_hash").get<std::string>();
}

/// Hash over every field but record_hash itself.
inline std::string audit_record_hash(const AuditRecord& r) {
    json j;
    to_json(j, r);
    j.erase("record_hash");
    return sha256_hex(canonicalize(j));
}

struct ChainStatus {
    bool valid = true;
    std::int64_t broken_at = 0;  // seq of the first bad record when invalid
};

/// Versioned on-disk store for the catalogues and environments, plus the
/// hash-chained audit log.
///
/// Layout under the root: one subdirectory per catalogue kind (environments
/// get a subdirectory per name), version files named {version:08d}.json,
/// audit.log as newline-delimited JSON, and an advisory `lock` file for the
/// single-writer discipline. Version files are written to a temp name and
/// renamed into place; existing versions are never rewritten.
///
/// Each version file is {"body": ..., "header": ..., "seal": sha256(canonical
/// of body+header)}; the seal makes any byte-level tamper of the file
/// detectable, and header.body_digest separately pins the body.
class Store {
public:
    explicit Store(fs::path root) : root_(std::move(root)) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) throw Error(ErrorCode::store_write_failure, "cannot create store root " + root_.string());
    }

    const fs::path& root() const { return root_; }

    /// Exclusive advisory lock on the store root, released on destruction.
    class WriteLock {
    public:
        explicit WriteLock(const fs::path& root) {
            fd_ = ::open((root / "lock").c_str(), O_CREAT | O_RDWR, 0644);
            if (fd_ < 0) throw Error(ErrorCode::store_write_failure, "cannot open lock file");
            if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
                ::close(fd_);
                fd_ = -1;
                throw Error(ErrorCode::store_write_failure, "store is locked by another writer");
            }
        }
        ~WriteLock() {
            if (fd_ >= 0) {
                ::flock(fd_, LOCK_UN);
                ::close(fd_);
            }
        }
        WriteLock(const WriteLock&) = delete;
        WriteLock& operator=(const WriteLock&) = delete;
        WriteLock(WriteLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

    private:
        int fd_ = -1;
    };

    WriteLock acquire_write_lock() const { return WriteLock(root_); }

    // -- versions ------------------------------------------------------------

    int save(CatalogueKind kind, const json& body, std::int64_t now, const std::string& env_name = "") {
        fs::path dir = kind_dir(kind, env_name);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::store_write_failure, "cannot create " + dir.string());

        auto latest = latest_version(kind, env_name);
        VersionHeader header;
        header.kind = kind;
        header.version = latest.value_or(0) + 1;
        header.parent_version = latest;
        header.created_at = now;
        header.body_digest = canonical_digest(body);

        json doc{{"body", body}, {"header", header}};
        doc["seal"] = sha256_hex(canonicalize(json{{"body", body}, {"header", header}}));
        std::string bytes = canonicalize(doc);

        fs::path final_path = version_path(kind, header.version, env_name);
        fs::path tmp_path = dir / (".tmp-" + file_name(header.version));
        {
            std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::store_write_failure, "cannot write " + tmp_path.string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            out.flush();
            if (!out) throw Error(ErrorCode::store_write_failure, "short write to " + tmp_path.string());
        }
        fs::rename(tmp_path, final_path, ec);
        if (ec) throw Error(ErrorCode::store_write_failure, "cannot publish " + final_path.string());
        return header.version;
    }

    std::optional<int> latest_version(CatalogueKind kind, const std::string& env_name = "") const {
        fs::path dir = kind_dir(kind, env_name);
        if (!fs::exists(dir)) return std::nullopt;
        std::optional<int> best;
        for (const auto& entry : fs::directory_iterator(dir)) {
            auto v = parse_version(entry.path().filename().string());
            if (v && (!best || *v > *best)) best = v;
        }
        return best;
    }

    struct Loaded {
        VersionHeader header;
        json body;
    };

    Loaded load(CatalogueKind kind, std::optional<int> version = std::nullopt,
                const std::string& env_name = "") const {
        int v;
        if (version) {
            v = *version;
        } else {
            auto latest = latest_version(kind, env_name);
            if (!latest) throw Error(ErrorCode::unknown_version, "no versions of " + to_string(kind));
            v = *latest;
        }
        fs::path path = version_path(kind, v, env_name);
        if (!fs::exists(path)) {
            throw Error(ErrorCode::unknown_version,
                        to_string(kind) + " version " + std::to_string(v) + " does not exist");
        }
        std::ifstream in(path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        json doc = json::parse(buf.str(), nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("body") || !doc.contains("header") ||
            !doc.contains("seal")) {
            throw Error(ErrorCode::digest_mismatch, "corrupt version file " + path.string());
        }
        std::string seal = sha256_hex(canonicalize(json{{"body", doc["body"]}, {"header", doc["header"]}}));
        if (!doc["seal"].is_string() || doc["seal"].get<std::string>() != seal) {
            throw Error(ErrorCode::digest_mismatch, "seal mismatch in " + path.string());
        }
        Loaded out;
        out.header = doc["header"].get<VersionHeader>();
        out.body = doc["body"];
        if (canonical_digest(out.body) != out.header.body_digest) {
            throw Error(ErrorCode::digest_mismatch, "body digest mismatch in " + path.string());
        }
        return out;
    }

    json load_body(CatalogueKind kind, std::optional<int> version = std::nullopt,
                   const std::string& env_name = "") const {
        return load(kind, version, env_name).body;
    }

    std::vector<VersionHeader> list_versions(CatalogueKind kind, const std::string& env_name = "") const {
        std::vector<VersionHeader> out;
        fs::path dir = kind_dir(kind, env_name);
        if (!fs::exists(dir)) return out;
        std::vector<int> versions;
        for (const auto& entry : fs::directory_iterator(dir)) {
            auto v = parse_version(entry.path().filename().string());
            if (v) versions.push_back(*v);
        }
        std::sort(versions.begin(), versions.end());
        for (int v : versions) out.push_back(load(kind, v, env_name).header);
        return out;
    }

    std::vector<std::string> environment_names() const {
        std::vector<std::string> out;
        fs::path dir = root_ / "environments";
        if (!fs::exists(dir)) return out;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_directory()) out.push_back(entry.path().filename().string());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    // -- audit log -----------------------------------------------------------

    AuditRecord append_audit(const std::string& actor, const std::string& operation,
                             std::vector<std::string> subjects, const std::string& before_digest,
                             const std::string& after_digest) {
        auto existing = read_audit();
        AuditRecord r;
        r.seq = static_cast<std::int64_t>(existing.size()) + 1;
        r.actor = actor;
        r.operation = operation;
        r.subjects = std::move(subjects);
        r.before_digest = before_digest;
        r.after_digest = after_digest;
        r.prev_record_hash = existing.empty() ? std::string(kGenesisHash) : existing.back().record_hash;
        r.record_hash = audit_record_hash(r);

        std::ofstream out(audit_path(), std::ios::binary | std::ios::app);
        if (!out) throw Error(ErrorCode::store_write_failure, "cannot append to audit log");
        json j;
        to_json(j, r);
        out << j.dump() << "\n";
        out.flush();
        if (!out) throw Error(ErrorCode::store_write_failure, "short write to audit log");
        return r;
    }

    std::vector<AuditRecord> read_audit() const {
        std::vector<AuditRecord> out;
        std::ifstream in(audit_path(), std::ios::binary);
        if (!in) return out;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                // leave a placeholder so verify_chain reports the right seq
                AuditRecord bad;
                bad.seq = static_cast<std::int64_t>(out.size()) + 1;
                bad.record_hash = "unparseable";
                out.push_back(std::move(bad));
                continue;
            }
            out.push_back(j.get<AuditRecord>());
        }
        return out;
    }

    ChainStatus verify_chain() const {
        auto records = read_audit();
        std::string prev(kGenesisHash);
        std::int64_t expected_seq = 1;
        for (const auto& r : records) {
            if (r.seq != expected_seq || r.prev_record_hash != prev ||
                r.record_hash != audit_record_hash(r)) {
                return {false, expected_seq};
            }
            prev = r.record_hash;
            ++expected_seq;
        }
        return {true, 0};
    }

    // -- analysis cross-references --------------------------------------------

    /// Sign-off back-references into the analysis catalogue: analysis version
    /// -> [{candidate, concept, concept_version}].
    void add_analysis_crossref(int analysis_version, const std::string& candidate_id,
                               const std::string& concept_id, int concept_version) {
        json all = read_crossrefs();
        std::string key = std::to_string(analysis_version);
        if (!all.contains(key)) all[key] = json::array();
        all[key].push_back(json{{"candidate", candidate_id},
                                {"concept", concept_id},
                                {"concept_version", concept_version}});
        std::string bytes = canonicalize(all);
        fs::path tmp = root_ / ".tmp-crossrefs.json";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        }
        fs::rename(tmp, crossref_path());
    }

    json read_crossrefs() const {
        std::ifstream in(crossref_path(), std::ios::binary);
        if (!in) return json::object();
        std::stringstream buf;
        buf << in.rdbuf();
        json j = json::parse(buf.str(), nullptr, false);
        return j.is_object() ? j : json::object();
    }

    fs::path version_path(CatalogueKind kind, int version, const std::string& env_name = "") const {
        return kind_dir(kind, env_name) / file_name(version);
    }
    fs::path audit_path() const { return root_ / "audit.log"; }

private:
    fs::path kind_dir(CatalogueKind kind, const std::string& env_name) const {
        if (kind == CatalogueKind::environment) {
            if (env_name.empty()) throw Error(ErrorCode::input_error, "environment name required");
            return root_ / "environments" / env_name;
        }
        return root_ / to_string(kind);
    }
    static std::string file_name(int version) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%08d.json", version);
        return buf;
    }
    static std::optional<int> parse_version(const std::string& name) {
        if (name.size() != 13 || name.substr(8) != ".json") return std::nullopt;
        int v = 0;
        for (char c : name.substr(0, 8)) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        return v > 0 ? std::optional<int>(v) : std::nullopt;
    }
    fs::path crossref_path() const { return root_ / "analysis_crossrefs.json"; }

    fs::path root_;
};

}  // namespace rolecycle
