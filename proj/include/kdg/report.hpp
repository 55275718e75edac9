#pragma once

// Canonical JSON reports: sorted keys, two-space indentation, doubles printed
// with 17 significant digits and non-finite values written as the strings
// "Infinity", "-Infinity" and "NaN". Every report is wrapped in an envelope
// carrying the schema version, tool name and version and the config hash.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace kdg {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolName = "kdg";

std::string_view tool_version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

/// A double as a JSON value (string for non-finite values).
Json json_number(double value);

std::string canonical_dump(const Json& j);

Json make_envelope(std::string_view command, std::string_view config_hash, std::uint64_t seed, Json body);

void write_report(const std::filesystem::path& path, const Json& envelope);
/// Parses a report and checks its schema version and tool name.
Json read_report(const std::filesystem::path& path);
Json parse_report(std::string_view text);
/// Parse then serialize: the canonical text of a report file.
std::string report_roundtrip(const std::filesystem::path& path);

}  // namespace kdg
