#include "kdg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kdg/error.hpp"

namespace kdg {

namespace {

void dump_to(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann::json keeps object keys in a std::map, hence sorted.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump_to(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_to(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += Json(std::isnan(x) ? "NaN" : (x > 0 ? "Infinity" : "-Infinity")).dump();
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      std::string s(buf);
      // Keep the value a float on re-parse.
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string_view tool_version() {
#ifdef KDG_VERSION
  return KDG_VERSION;
#else
  return "0.0.0";
#endif
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

Json json_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  return value;
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_to(j, out, 0);
  out += "\n";
  return out;
}

Json make_envelope(std::string_view command, std::string_view config_hash, std::uint64_t seed, Json body) {
  Json env;
  env["schema_version"] = kSchemaVersion;
  env["tool"] = std::string(kToolName);
  env["tool_version"] = std::string(tool_version());
  env["command"] = std::string(command);
  env["config_hash"] = std::string(config_hash);
  env["seed"] = seed;
  env["report"] = std::move(body);
  return env;
}

void write_report(const std::filesystem::path& path, const Json& envelope) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << canonical_dump(envelope);
}

Json parse_report(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  require(j.is_object(), "a report must be a JSON object");
  require(j.contains("schema_version") && j["schema_version"].is_number_integer(), "report lacks schema_version");
  const int v = j["schema_version"].get<int>();
  if (v > kSchemaVersion)
    throw ValidationError("report schema version " + std::to_string(v) + " is newer than supported version " +
                          std::to_string(kSchemaVersion));
  require(v == kSchemaVersion, "unsupported report schema version " + std::to_string(v));
  require(j.contains("tool") && j["tool"] == std::string(kToolName), "report was not produced by kdg");
  return j;
}

Json read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

std::string report_roundtrip(const std::filesystem::path& path) { return canonical_dump(read_report(path)); }

}  // namespace kdg
