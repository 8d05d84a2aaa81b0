#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evkit::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// A fully-read CSV file with a mandatory header row. Fields may be quoted
// with '"' (doubled quotes escape); unquoted fields are taken verbatim.
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse(std::string_view text, std::string source_name);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::string& source() const { return source_; }

  // Throws InputError unless the header equals `expected` exactly.
  void require_header(const std::vector<std::string>& expected) const;

  // Error helpers that name the file and line.
  [[noreturn]] void fail(const Row& row, const std::string& message) const;
  double number(const Row& row, std::size_t column) const;
  bool flag(const Row& row, std::size_t column) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

// Shortest round-trippable representation.
std::string exact(double value);
// Fixed significant-digit representation for reports.
std::string number(double value, int significant = 10);
std::string quote_if_needed(std::string_view field);

void write_line(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace evkit::csv
