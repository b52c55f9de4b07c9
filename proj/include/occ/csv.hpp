#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "occ/common.hpp"

namespace occ {

// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw Error(ErrorKind::schema, "bad number: '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw Error(ErrorKind::schema, "bad integer: '" + std::string(s) + "'");
  return v;
}

// Minimal RFC-4180-style row splitter: quotes, doubled quotes, configurable delimiter.
inline std::vector<std::string> split_csv_row(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_escape(const std::string& s, char delim) {
  bool need = s.find(delim) != std::string::npos || s.find('"') != std::string::npos ||
              s.find('\n') != std::string::npos;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

// Header-indexed CSV reader over a stream.
class CsvReader {
 public:
  CsvReader(std::istream& in, char delim = ',') : in_(in), delim_(delim) {
    std::string header;
    if (!std::getline(in_, header))
      throw Error(ErrorKind::schema, "empty input: no header row");
    header_ = split_csv_row(header, delim_);
    for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
    line_no_ = 1;
  }

  const std::vector<std::string>& header() const { return header_; }

  bool has_column(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      throw Error(ErrorKind::schema, "missing mandatory column '" + name + "'");
    return it->second;
  }

  // Next data row, or nullopt at EOF. Blank lines are skipped.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
      return split_csv_row(line, delim_);
    }
    return std::nullopt;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  char delim_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_no_ = 0;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header, char delim = ',')
      : out_(out), delim_(delim), cols_(header.size()) {
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << delim_;
      out_ << csv_escape(cells[i], delim_);
    }
    out_ << '\n';
  }

  std::size_t columns() const { return cols_; }

 private:
  std::ostream& out_;
  char delim_;
  std::size_t cols_;
};

}  // namespace occ
