#include "evkit/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "evkit/errors.hpp"

namespace evkit::csv {

namespace {

std::vector<std::string> split_line(std::string_view line, const std::string& source,
                                    std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && current.empty()) {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (in_quotes) {
    throw InputError(source + ":" + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

Table Table::parse(std::string_view text, std::string source_name) {
  Table table;
  table.source_ = std::move(source_name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    // Strip a UTF-8 byte-order mark on the header line.
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (!line.empty()) {
      auto fields = split_line(line, table.source_, line_no);
      if (!have_header) {
        table.header_ = std::move(fields);
        have_header = true;
      } else {
        if (fields.size() != table.header_.size()) {
          throw InputError(table.source_ + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(table.header_.size()) + " fields, found " +
                           std::to_string(fields.size()));
        }
        table.rows_.push_back(Row{line_no, std::move(fields)});
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (!have_header) {
    throw InputError(table.source_ + ": missing header row");
  }
  return table;
}

void Table::require_header(const std::vector<std::string>& expected) const {
  if (header_ != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw InputError(source_ + ":1: header must be '" + want + "'");
  }
}

void Table::fail(const Row& row, const std::string& message) const {
  throw InputError(source_ + ":" + std::to_string(row.line) + ": " + message);
}

double Table::number(const Row& row, std::size_t column) const {
  const std::string& field = row.fields.at(column);
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    fail(row, "malformed number '" + field + "' in column '" + header_.at(column) + "'");
  }
  return value;
}

bool Table::flag(const Row& row, std::size_t column) const {
  const std::string& field = row.fields.at(column);
  if (field == "0") return false;
  if (field == "1") return true;
  fail(row, "flag column '" + header_.at(column) + "' must be 0 or 1, found '" + field + "'");
}

std::string exact(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string number(double value, int significant) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, value);
  return buf;
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote_if_needed(fields[i]);
  }
  out << '\n';
}

}  // namespace evkit::csv
