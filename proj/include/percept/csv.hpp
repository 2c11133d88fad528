#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "percept/common.hpp"

namespace percept {

// RFC-4180-ish reader: quoted fields, embedded commas/newlines, CRLF.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Blank lines are skipped.
  bool next_row(std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      if (c == '\n') ++line_;
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(static_cast<char>(c));
        }
        any = true;
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          any = true;
          break;
        case ',':
          out.push_back(std::move(field));
          field.clear();
          any = true;
          break;
        case '\r':
          break;
        case '\n':
          if (!any) continue;  // skip blank line
          out.push_back(std::move(field));
          return true;
        default:
          field.push_back(static_cast<char>(c));
          any = true;
      }
    }
    if (any) {
      out.push_back(std::move(field));
      return true;
    }
    return false;
  }

  size_t line() const { return line_; }

 private:
  std::istream& in_;
  size_t line_ = 0;
};

// Shortest round-trip representation; keeps rewritten artifacts byte-stable.
inline std::string format_double(double v) {
  if (is_missing(v)) return "";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

// Empty field -> missing. Anything unparseable is a data error at the caller.
inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) {
    out = kMissing;
    return true;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline void write_csv_field(std::ostream& os, std::string_view s) {
  if (s.find_first_of(",\"\n\r") != std::string_view::npos) {
    os << '"';
    for (char c : s) {
      if (c == '"') os << '"';
      os << c;
    }
    os << '"';
  } else {
    os << s;
  }
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    write_csv_field(os, fields[i]);
  }
  os << '\n';
}

}  // namespace percept
