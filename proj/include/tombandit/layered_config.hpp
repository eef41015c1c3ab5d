#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>

#include <json.hpp>

namespace tombandit {

inline constexpr const char* kEnvPrefix = "TOMBANDIT_";

/// Reads a JSON config file; every key must be one of `known_keys`.
nlohmann::json load_config_file(const std::filesystem::path& path, std::span<const std::string> known_keys);

/// Collects TOMBANDIT_<KEY> variables for the given keys (key upper-cased).
/// Values that parse as JSON keep their type; anything else is a string.
nlohmann::json env_layer(std::span<const std::string> known_keys,
                         const std::function<const char*(const char*)>& lookup);

/// Later layers win key by key: merge_layers({defaults, file, env, flags}).
nlohmann::json merge_layers(std::initializer_list<nlohmann::json> layers);

/// "a,b,c" strings under `key` become arrays.
void split_list_field(nlohmann::json& doc, const std::string& key);

}  // namespace tombandit
