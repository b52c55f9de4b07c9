#pragma once

// Small TOML subset reader, enough for run configs: comments, [tables],
// key = string|int|float|bool|array-of-scalars. Keys flatten to "table.key".

#include <cctype>
#include <istream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "occ/common.hpp"
#include "occ/csv.hpp"

namespace occ::toml {

using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

class Table {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, std::string dflt = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw Error(ErrorKind::config, "config key '" + key + "' is not a string");
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt = 0) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
    throw Error(ErrorKind::config, "config key '" + key + "' is not an integer");
  }

  double get_double(const std::string& key, double dflt = 0) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (auto* d = std::get_if<double>(&it->second)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    throw Error(ErrorKind::config, "config key '" + key + "' is not a number");
  }

  bool get_bool(const std::string& key, bool dflt = false) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (auto* b = std::get_if<bool>(&it->second)) return *b;
    throw Error(ErrorKind::config, "config key '" + key + "' is not a boolean");
  }

  std::vector<std::string> get_array(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    if (auto* a = std::get_if<std::vector<std::string>>(&it->second)) return *a;
    throw Error(ErrorKind::config, "config key '" + key + "' is not an array");
  }

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  const std::map<std::string, Value>& entries() const { return values_; }

  // Canonical dump: sorted keys, one per line. Input to the config hash.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
      out += k;
      out += '=';
      if (auto* s = std::get_if<std::string>(&v)) {
        out += '"' + *s + '"';
      } else if (auto* i = std::get_if<std::int64_t>(&v)) {
        out += std::to_string(*i);
      } else if (auto* d = std::get_if<double>(&v)) {
        out += format_double(*d);
      } else if (auto* b = std::get_if<bool>(&v)) {
        out += *b ? "true" : "false";
      } else if (auto* a = std::get_if<std::vector<std::string>>(&v)) {
        out += '[';
        for (std::size_t i = 0; i < a->size(); ++i) {
          if (i) out += ',';
          out += (*a)[i];
        }
        out += ']';
      }
      out += '\n';
    }
    return out;
  }

 private:
  std::map<std::string, Value> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline Value parse_scalar(const std::string& raw, std::size_t line) {
  std::string t = trim(raw);
  if (t.empty()) throw Error(ErrorKind::config, "empty value at line " + std::to_string(line));
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw Error(ErrorKind::config, "unterminated string at line " + std::to_string(line));
    std::string out;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == '\\' && i + 2 < t.size()) {
        ++i;
        switch (t[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: out += t[i];
        }
      } else {
        out += t[i];
      }
    }
    return out;
  }
  if (t == "true") return true;
  if (t == "false") return false;
  bool looks_float = t.find_first_of(".eE") != std::string::npos;
  try {
    if (!looks_float) return parse_int(t);
    return parse_double(t);
  } catch (const Error&) {
    // bare word: accept as string (dates etc.)
    return t;
  }
}

}  // namespace detail

inline Table parse(std::istream& in) {
  Table tab;
  std::string prefix;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw Error(ErrorKind::config, "bad table header at line " + std::to_string(line_no));
      prefix = detail::trim(t.substr(1, t.size() - 2));
      if (!prefix.empty()) prefix += '.';
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config, "expected key = value at line " + std::to_string(line_no));
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    // strip trailing comment outside quotes/brackets
    bool in_str = false;
    for (std::size_t i = 0; i < val.size(); ++i) {
      if (val[i] == '"') in_str = !in_str;
      if (val[i] == '#' && !in_str) {
        val = detail::trim(val.substr(0, i));
        break;
      }
    }
    if (key.empty() || val.empty())
      throw Error(ErrorKind::config, "expected key = value at line " + std::to_string(line_no));
    if (val.front() == '[') {
      if (val.back() != ']')
        throw Error(ErrorKind::config, "unterminated array at line " + std::to_string(line_no));
      std::vector<std::string> items;
      std::string body = val.substr(1, val.size() - 2);
      std::string cur;
      bool instr = false;
      for (char c : body) {
        if (c == '"') instr = !instr;
        if (c == ',' && !instr) {
          items.push_back(detail::trim(cur));
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!detail::trim(cur).empty()) items.push_back(detail::trim(cur));
      for (auto& it : items) {
        if (!it.empty() && it.front() == '"' && it.back() == '"' && it.size() >= 2)
          it = it.substr(1, it.size() - 2);
      }
      tab.set(prefix + key, items);
    } else {
      tab.set(prefix + key, detail::parse_scalar(val, line_no));
    }
  }
  return tab;
}

}  // namespace occ::toml
