#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gaze/core/error.hpp"

namespace gaze {

using Json = nlohmann::json;

/// Canonical form: sorted keys (nlohmann's default std::map object), no
/// insignificant whitespace, shortest round-trip numbers.
std::string canonical_dump(const Json& value);

/// Rounds to 6 decimal places; -0 collapses to 0.
double round6(double x);

/// Copy of `value` with every floating-point number rounded by round6.
Json rounded(const Json& value);

/// One JSONL line: canonical form of rounded(value), no trailing newline.
std::string canonical_line(const Json& value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& value);

/// Parses JSONL; a malformed line throws SchemaViolation naming the line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

// Field access that reports schema problems instead of throwing type_error.
template <typename T>
T field(const Json& obj, const char* key, Errc code = Errc::SchemaViolation) {
  if (!obj.is_object() || !obj.contains(key)) fail(code, std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(code, std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const Json& obj, const char* key, T fallback, Errc code = Errc::SchemaViolation) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return field<T>(obj, key, code);
}

}  // namespace gaze
