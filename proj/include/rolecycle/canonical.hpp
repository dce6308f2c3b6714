#pragma once

#include "rolecycle/errors.hpp"
#include "rolecycle/sha256.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

namespace rolecycle {

using json = nlohmann::json;

namespace detail {
inline void require_canonicalizable(const json& j) {
    if (j.is_number_float()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_canonicalizable, "non-finite number in document");
        }
    } else if (j.is_object() || j.is_array()) {
        for (const auto& child : j) require_canonicalizable(child);
    } else if (j.is_binary() || j.is_discarded()) {
        throw Error(ErrorCode::non_canonicalizable, "non-JSON value in document");
    }
}
}  // namespace detail

/// Canonical serialization: UTF-8, object keys sorted (nlohmann objects are
/// ordered maps), no insignificant whitespace, line-feed terminated. Equal
/// values always produce identical bytes; array order is the caller's
/// contract and must already be deterministic.
inline std::string canonicalize(const json& body) {
    detail::require_canonicalizable(body);
    return body.dump() + "\n";
}

inline std::string canonical_digest(const json& body) {
    return sha256_hex(canonicalize(body));
}

}  // namespace rolecycle
