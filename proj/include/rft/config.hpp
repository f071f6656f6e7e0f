#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rft/types.hpp"

namespace rft {

/// Declarative experiment file: `key = value` lines grouped under `[section]`
/// headers, `#` comments, comma-separated lists (optionally in brackets),
/// optional double quotes around strings. Keys before any header belong to
/// the section "". Errors carry the source name and line number.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "config");
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  int line(const std::string& section, const std::string& key) const;
  const std::string& source() const { return source_; }

  std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key, const std::vector<int>& fallback) const;

  /// Throws naming the first key (or section) not listed in `allowed`.
  void check_known(const std::map<std::string, std::set<std::string>>& allowed) const;

  /// "source:line: message" for the given key.
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

}  // namespace rft
