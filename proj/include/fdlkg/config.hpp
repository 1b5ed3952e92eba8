#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fdlkg/domain.hpp"

namespace fdlkg {

// Sectioned key = value text. Every key a getter touches (present or defaulted)
// is registered; finish() rejects anything left over by name, so typos and
// keys meant for a different subcommand fail loudly.
struct ConfigMap {
  std::map<std::string, std::map<std::string, std::string>> kv;
  mutable std::set<std::string> known;

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static ConfigMap parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
  }

  static ConfigMap parse_text(const std::string& text, const std::string& origin = "<config>") {
    ConfigMap c;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw config_error(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty())
          throw config_error(origin + ":" + std::to_string(lineno) + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
      if (section.empty())
        throw config_error(origin + ":" + std::to_string(lineno) + ": key outside any section");
      c.kv[section][key] = val;
    }
    return c;
  }

  // "section.key=value"
  void apply_set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw config_error("--set expects section.key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string val = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
      throw config_error("--set expects section.key=value, got: " + assignment);
    kv[path.substr(0, dot)][path.substr(dot + 1)] = val;
  }

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = kv.find(sec);
    return s != kv.end() && s->second.count(key) > 0;
  }

  std::string get_str(const std::string& sec, const std::string& key,
                      const std::string& dflt) const {
    known.insert(sec + "." + key);
    const auto s = kv.find(sec);
    if (s == kv.end()) return dflt;
    const auto k = s->second.find(key);
    return k == s->second.end() ? dflt : k->second;
  }

  double get_double(const std::string& sec, const std::string& key, double dflt) const {
    const std::string v = get_str(sec, key, "");
    if (v.empty()) return dflt;
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw config_error("config key [" + sec + "] " + key + ": not a number: " + v);
    }
  }

  long get_long(const std::string& sec, const std::string& key, long dflt) const {
    const std::string v = get_str(sec, key, "");
    if (v.empty()) return dflt;
    try {
      std::size_t pos = 0;
      const long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw config_error("config key [" + sec + "] " + key + ": not an integer: " + v);
    }
  }

  bool get_bool(const std::string& sec, const std::string& key, bool dflt) const {
    const std::string v = get_str(sec, key, "");
    if (v.empty()) return dflt;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("config key [" + sec + "] " + key + ": not a boolean: " + v);
  }

  std::vector<double> get_list(const std::string& sec, const std::string& key,
                               std::vector<double> dflt) const {
    const std::string v = get_str(sec, key, "");
    if (v.empty()) return dflt;
    std::vector<double> out;
    std::istringstream in(v);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw config_error("config key [" + sec + "] " + key + ": not a number list: " + v);
      }
    }
    if (out.empty()) throw config_error("config key [" + sec + "] " + key + ": empty list");
    return out;
  }

  void finish() const {
    for (const auto& [sec, entries] : kv)
      for (const auto& [key, value] : entries)
        if (!known.count(sec + "." + key))
          throw config_error("unknown config key: [" + sec + "] " + key);
  }

  // canonical echo used for hashing and the summary
  std::string canonical() const {
    std::string out;
    for (const auto& [sec, entries] : kv) {
      out += "[" + sec + "]\n";
      for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
    }
    return out;
  }
};

}  // namespace fdlkg
