#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nzsim {

/// Minimal comma-separated table: header row plus string cells. No quoting.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::string_view text, std::string source = "<memory>");

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  bool has_column(std::string_view name) const;

  const std::string& cell(std::size_t row, std::string_view column) const;
  double number(std::size_t row, std::string_view column) const;
  /// Source line of a data row (1-based, header is line 1).
  std::size_t line(std::size_t row) const { return lines_.at(row); }
  const std::string& source() const { return source_; }

 private:
  std::size_t column_index(std::string_view name) const;

  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

/// Writes rows to a CSV file; throws on I/O failure.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& add(std::string_view text);
  CsvWriter& add(double value);
  CsvWriter& add(int value);
  void end_row();
  /// Flushes the buffered table to disk. Called by the destructor if omitted.
  void close();

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::vector<std::string> row_;
  std::size_t columns_;
  bool closed_ = false;
};

}  // namespace nzsim
