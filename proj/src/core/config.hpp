#pragma once

#include <map>
#include <optional>
#include <string>

namespace smim::io {

// Flat key=value configuration with [section] headers and '#' comments.
// Keys are addressed as "section.key". No nesting.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& dflt) const;
  std::string require(const std::string& key) const;  // throws naming the key

  double num_or(const std::string& key, double dflt) const;
  long long int_or(const std::string& key, long long dflt) const;
  unsigned long long uint_or(const std::string& key, unsigned long long dflt) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Stable serialized form (sections sorted, keys sorted within a section).
  std::string to_string() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace smim::io
