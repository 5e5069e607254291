#pragma once
// Small helpers for strict JSON documents: unknown keys are rejected and every
// error names the offending key path.

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace percept {

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

void require_object(const nlohmann::json& node, const std::string& path);
void reject_unknown_keys(const nlohmann::json& node, std::initializer_list<std::string_view> known,
                         const std::string& path);

template <typename T>
T get_or(const nlohmann::json& node, const char* key, const T& fallback, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("invalid value for key '" + path + "." + key + "'");
  }
}

template <typename T>
T get_required(const nlohmann::json& node, const char* key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) throw ConfigError("missing required key '" + path + "." + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("invalid value for key '" + path + "." + key + "'");
  }
}

/// Parses text, converting parse errors into ConfigError with line/column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source_name);
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace percept
