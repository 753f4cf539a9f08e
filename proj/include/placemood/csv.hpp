#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "placemood/error.hpp"

namespace placemood::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Streaming RFC 4180 reader: quoted fields, doubled quotes, embedded newlines,
/// CRLF or LF line endings. A UTF-8 byte order mark on the first line is skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Row> next() {
    Row row;
    std::string field;
    bool quoted = false;
    bool any = false;
    row.line = line_ + 1;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
      } else if (ch == '\r') {
        if (in_.peek() == '\n') continue;
        field.push_back(ch);
      } else if (ch == '\n') {
        ++line_;
        row.fields.push_back(std::move(field));
        strip_bom(row);
        return row;
      } else {
        field.push_back(ch);
      }
    }
    if (quoted) throw SchemaError("line " + std::to_string(row.line) + ": unterminated quoted field");
    if (!any) return std::nullopt;
    ++line_;
    row.fields.push_back(std::move(field));
    strip_bom(row);
    return row;
  }

 private:
  void strip_bom(Row& row) {
    if (row.line == 1 && !row.fields.empty() && row.fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
      row.fields[0].erase(0, 3);
    }
  }

  std::istream& in_;
  std::size_t line_ = 0;
};

inline std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s == "nan") return std::nan("");
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Reads the header row and checks it equals `expected` exactly (order included).
inline void expect_header(Reader& reader, const std::vector<std::string>& expected,
                          std::string_view file_kind) {
  auto header = reader.next();
  if (!header) throw SchemaError(std::string(file_kind) + ": empty input, header row missing");
  for (auto& f : header->fields) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.pop_back();
  }
  if (header->fields != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    std::string got;
    for (const auto& e : header->fields) got += (got.empty() ? "" : ",") + e;
    for (const auto& e : expected) {
      bool found = false;
      for (const auto& g : header->fields) found = found || g == e;
      if (!found) {
        throw SchemaError(std::string(file_kind) + ": missing required column '" + e +
                          "'; expected header " + want);
      }
    }
    throw SchemaError(std::string(file_kind) + ": header must be exactly " + want + " (got " + got + ")");
  }
}

}  // namespace placemood::csv
