// Internal JSON (de)serialization shared by config.cpp and manifest.cpp.
#pragma once

#include <nlohmann/json.hpp>

#include "synthvox/config.hpp"

namespace synthvox::detail {

nlohmann::json config_to_json(const GenerationConfig& cfg);

/// Strict: unknown keys raise ConfigError. Subject paths are resolved
/// against base_dir when non-empty.
GenerationConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir);

} // namespace synthvox::detail
