#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace locpert {

using Json = nlohmann::ordered_json;

/// A run configuration file: flat `[section]` headers followed by
/// `key = value` lines.  Values are numbers, "strings", true/false, [arrays]
/// and {inline = tables}; arrays and tables may span lines.  `pi` and
/// `<number>*pi` are accepted as numbers.  `#` starts a comment.  A key may
/// repeat inside a section (noise modes are listed that way).
///
/// Every error is reported as ConfigError with the source name and line.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, const std::string& source = "<config>");
  static ConfigDocument load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;

  /// The single value of `key`; throws ConfigError if absent or repeated.
  const Json& get(const std::string& section, const std::string& key) const;

  /// Every value of `key` in file order (possibly none).
  std::vector<Json> get_all(const std::string& section, const std::string& key) const;

  /// Replaces all occurrences of `key` (creating the section if needed).
  void set(const std::string& section, const std::string& key, Json value);

  std::vector<std::string> sections() const;
  /// Distinct keys of a section in first-appearance order.
  std::vector<std::string> keys(const std::string& section) const;

  /// Sections as objects; a repeated key maps to the array of its values.
  Json to_json() const;

  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string key;
    Json value;
    int line = 0;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };

  const Section* find(const std::string& section) const;

  std::string source_;
  std::vector<Section> sections_;
};

}  // namespace locpert
