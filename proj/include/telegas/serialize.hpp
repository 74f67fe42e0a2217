#pragma once

// JSON encodings of the core types (nlohmann ADL hooks).

#include <json.hpp>

#include "telegas/core.hpp"

namespace telegas {

void to_json(nlohmann::json& j, const Params& p);
void from_json(const nlohmann::json& j, Params& p);

void to_json(nlohmann::json& j, const VelocityState& s);
void from_json(const nlohmann::json& j, VelocityState& s);

/// Encoded as the two-character string "01" etc.
void to_json(nlohmann::json& j, const PatternPair& p);
void from_json(const nlohmann::json& j, PatternPair& p);

/// "equiprobable" or an array of 0/1 labels.
void to_json(nlohmann::json& j, const InitialRegimes& r);
void from_json(const nlohmann::json& j, InitialRegimes& r);

void to_json(nlohmann::json& j, const GasConfig& g);
void from_json(const nlohmann::json& j, GasConfig& g);

}  // namespace telegas
