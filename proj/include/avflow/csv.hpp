#pragma once

// Minimal RFC-4180 CSV: comma separated, CRLF-agnostic reading, fields
// quoted when they contain a comma, quote or line break. Doubles are
// written with 17 significant digits so they round-trip exactly; NaN is
// written as an empty field.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "avflow/errors.hpp"

namespace avflow {

inline std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) {
    begin();
    for (const auto& h : header) field(h);
    end();
  }

  template <class... Ts>
  void row(const Ts&... vs) {
    static_assert(sizeof...(Ts) > 0);
    begin();
    (field(vs), ...);
    end();
  }

  void field(const std::string& s) { sep(); os_ << csv_escape(s); }
  void field(const char* s) { field(std::string(s)); }
  void field(double v) { sep(); os_ << format_double(v); }
  void field(std::size_t v) { sep(); os_ << v; }
  void field(long v) { sep(); os_ << v; }
  void field(int v) { sep(); os_ << v; }
  void field(bool v) { sep(); os_ << (v ? 1 : 0); }

 private:
  void begin() { col_ = 0; }
  void sep() {
    if (col_++ > 0) os_ << ',';
  }
  void end() {
    if (col_ != width_) throw ConfigError("CSV row width does not match header");
    os_ << "\r\n";
  }

  std::ostream& os_;
  std::size_t width_;
  std::size_t col_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV has no column '" + std::string(name) + "'");
  }
};

inline CsvTable parse_csv(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cur;
  bool quoted = false, any = false;
  char c;
  auto flush_record = [&] {
    rec.push_back(cur);
    cur.clear();
    if (!(rec.size() == 1 && rec[0].empty() && !any)) records.push_back(rec);
    rec.clear();
    any = false;
  };
  while (is.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          cur += '"';
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(cur);
      cur.clear();
      any = true;
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get(c);
      flush_record();
    } else if (c == '\n') {
      flush_record();
    } else {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("CSV: unterminated quoted field");
  if (any || !cur.empty() || !rec.empty()) flush_record();
  if (records.empty()) throw ConfigError("CSV: missing header");
  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw ConfigError("CSV: row " + std::to_string(i) + " has " +
                        std::to_string(records[i].size()) + " fields, header has " +
                        std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CSV file " + path);
  return parse_csv(in);
}

// Empty field reads as NaN.
inline double parse_double(const std::string& s) {
  if (s.empty()) return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ConfigError("CSV: '" + s + "' is not a number");
  return v;
}

}  // namespace avflow
