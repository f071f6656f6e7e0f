#include "rft/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rft {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  c.sections_[section];
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(source + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw Error(source + ":" + std::to_string(lineno) + ": empty section name");
      if (c.section_lines_.count(section)) {
        throw Error(source + ":" + std::to_string(lineno) + ": duplicate section [" + section + "]");
      }
      c.sections_[section];
      c.section_lines_[section] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(source + ":" + std::to_string(lineno) + ": missing key");
    auto& sec = c.sections_[section];
    if (sec.count(key)) throw Error(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    sec[key] = {value, lineno};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

int Config::line(const std::string& section, const std::string& key) const {
  return has(section, key) ? sections_.at(section).at(key).line : 0;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& message) const {
  const std::string where = section.empty() ? key : section + "." + key;
  throw Error(source_ + ":" + std::to_string(line(section, key)) + ": " + where + ": " + message);
}

std::string Config::get(const std::string& section, const std::string& key, const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return unquote(sections_.at(section).at(key).value);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (...) {
  }
  fail(section, key, "expected a number, got '" + v + "'");
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const double x = get_double(section, key, fallback);
  if (x != static_cast<int>(x)) fail(section, key, "expected an integer");
  return static_cast<int>(x);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = lower(get(section, key, ""));
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  fail(section, key, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = trim(sections_.at(section).at(key).value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(section, key, "unterminated list");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& s : get_list(section, key, {})) {
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size()) throw Error("");
      out.push_back(x);
    } catch (...) {
      fail(section, key, "expected numbers, got '" + s + "'");
    }
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<int> out;
  for (double x : get_doubles(section, key, {})) {
    if (x != static_cast<int>(x)) fail(section, key, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

void Config::check_known(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [section, keys] : sections_) {
    const auto a = allowed.find(section);
    if (a == allowed.end()) {
      if (keys.empty() && section.empty()) continue;
      const int l = section_lines_.count(section) ? section_lines_.at(section) : 0;
      throw Error(source_ + ":" + std::to_string(l) + ": unknown section [" + section + "]");
    }
    for (const auto& [key, entry] : keys) {
      if (!a->second.count(key)) {
        const std::string where = section.empty() ? key : section + "." + key;
        throw Error(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + where + "'");
      }
    }
  }
}

}  // namespace rft
