#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "citygwr/gwr.hpp"

namespace citygwr {

inline constexpr int kSnapshotFormatVersion = 1;

nlohmann::json params_to_json(const Hyperparameters& p);
Hyperparameters params_from_json(const nlohmann::json& j);

/// Versioned JSON document:
/// {format_version, params, input_dim, step_count, next_id,
///  neurons: [{id, w, eta}], edges: [[i, j, age]]}
nlohmann::json snapshot(const Network& net);

/// Inverse of snapshot(). Throws PersistenceError on a version mismatch or a
/// malformed document; never returns a partially built network.
Network restore(const nlohmann::json& doc);
Network parse_snapshot(std::string_view text);

std::string snapshot_string(const Network& net);

}  // namespace citygwr
