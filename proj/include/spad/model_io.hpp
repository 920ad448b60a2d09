#pragma once

// JSON schema for environments and policies.
//
// Environment:
//   {
//     "d": 3,
//     "h": [1.0, 1.0, 1.0],
//     "w": [3.0, 1.0, 1.0],
//     "det": [ {"family": "exponential", "kappa": 1.0}, ... ],
//     "harm_resp": [ {"family": "exponential_decay", "beta": 1.0}, ... ],
//     "cost": [ {"family": "power_law", "p": 2.0}, ... ],
//     "B": 1.5,
//     "eps_tot": 3.0
//   }
//
// det families:
//   {"family": "exponential", "kappa"}
//   {"family": "gaussian", "sensitivity", "delta", "level", "h_ref"}
//   {"family": "laplace", "sensitivity", "c_null", "h_ref"}
//   {"family": "randomized_response", "n", "level", "h_ref"}
// harm_resp families:
//   {"family": "exponential_decay", "beta"}
//   {"family": "linear_clamp", "gamma"}
//
// Policy:
//   {"pi": [...], "eps": [...]}   optionally "full_detectability": true
//
// Doubles are written with round-trip precision.

#include "spad/model.hpp"

#include <json.hpp>

#include <filesystem>

namespace spad {

using Json = nlohmann::json;

Json to_json(const DetectabilitySpec& spec);
Json to_json(const HarmResponseSpec& spec);
Json to_json(const CostSpec& spec);
Json to_json(const Environment& env);
Json to_json(const AuditPolicy& policy);
Json to_json(const AuditMetrics& metrics);

DetectabilitySpec detectability_from_json(const Json& j);
HarmResponseSpec harm_response_from_json(const Json& j);
CostSpec cost_from_json(const Json& j);
Environment environment_from_json(const Json& j);
AuditPolicy policy_from_json(const Json& j);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Reads a JSON file. Throws std::runtime_error when the file cannot be
/// opened or parsed.
Json read_json_file(const std::filesystem::path& path);

}  // namespace spad
