#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <utility>

namespace rolecycle {

enum class ErrorCode {
    duplicate_id,
    dangling_reference,
    cycle_detected,
    unknown_role,
    unknown_user,
    unknown_permission,
    unknown_entity,
    duplicate_assignment,
    no_such_assignment,
    sod_violation,
    invalid_status,
    not_authorized,
    empty_permission_selection,
    version_mismatch,
    cyclic_org_structure,
    empty_catalogue,
    not_a_partition,
    unknown_version,
    digest_mismatch,
    integrity_failure,
    store_write_failure,
    invariant_violation,
    non_canonicalizable,
    input_error,
};

inline std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::duplicate_id: return "DuplicateId";
        case ErrorCode::dangling_reference: return "DanglingReference";
        case ErrorCode::cycle_detected: return "CycleDetected";
        case ErrorCode::unknown_role: return "UnknownRole";
        case ErrorCode::unknown_user: return "UnknownUser";
        case ErrorCode::unknown_permission: return "UnknownPermission";
        case ErrorCode::unknown_entity: return "UnknownEntity";
        case ErrorCode::duplicate_assignment: return "DuplicateAssignment";
        case ErrorCode::no_such_assignment: return "NoSuchAssignment";
        case ErrorCode::sod_violation: return "SodViolation";
        case ErrorCode::invalid_status: return "InvalidStatus";
        case ErrorCode::not_authorized: return "NotAuthorized";
        case ErrorCode::empty_permission_selection: return "EmptyPermissionSelection";
        case ErrorCode::version_mismatch: return "VersionMismatch";
        case ErrorCode::cyclic_org_structure: return "CyclicOrgStructure";
        case ErrorCode::empty_catalogue: return "EmptyCatalogue";
        case ErrorCode::not_a_partition: return "NotAPartition";
        case ErrorCode::unknown_version: return "UnknownVersion";
        case ErrorCode::digest_mismatch: return "DigestMismatch";
        case ErrorCode::integrity_failure: return "IntegrityFailure";
        case ErrorCode::store_write_failure: return "StoreWriteFailure";
        case ErrorCode::invariant_violation: return "InvariantViolation";
        case ErrorCode::non_canonicalizable: return "NonCanonicalizable";
        case ErrorCode::input_error: return "InputError";
    }
    return "Unknown";
}

/// Library-wide error. `details` carries structured payloads (e.g. the SOD
/// violations that caused a rejection) for callers that render reports.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          details_(std::move(details)) {}

    ErrorCode code() const { return code_; }
    const nlohmann::json& details() const { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

}  // namespace rolecycle
