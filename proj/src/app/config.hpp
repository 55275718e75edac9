#pragma once

// Run configuration: an INI file with [section] headers and key = value
// lines. Every key is declared in one registry with a default, a description
// and a range check; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kdg::app {

enum class KeyType { real, integer, text, list };

struct KeySpec {
  std::string name;  ///< section.key
  KeyType type;
  std::string fallback;
  std::string help;
  /// Returns an error message for an invalid value, empty when valid.
  std::function<std::string(const std::string&)> check;
};

const std::vector<KeySpec>& key_registry();
/// One line per key, for --help.
std::string describe_keys();

class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::filesystem::path& path);
  /// Merges an INI file; only the [surrogate] section is accepted when
  /// surrogate_only is set.
  void merge_file(const std::filesystem::path& path, bool surrogate_only = false);
  void set(const std::string& key, const std::string& value);

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  bool flag(const std::string& key) const { return integer(key) != 0; }

  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  int refine = 0;

  /// Sorted key = value lines of the effective configuration plus the seed.
  std::string canonical_text() const;
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
  const KeySpec& key_spec(const std::string& key) const;
};

}  // namespace kdg::app
