#include "nzsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nzsim/errors.hpp"

namespace nzsim {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CSV file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

CsvTable CsvTable::parse(std::string_view text, std::string source) {
  CsvTable table;
  table.source_ = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto cells = split(line);
    if (table.header_.empty()) {
      table.header_ = std::move(cells);
      continue;
    }
    if (cells.size() != table.header_.size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} columns, found {}", table.source_,
                                    line_no, table.header_.size(), cells.size()));
    }
    table.rows_.push_back(std::move(cells));
    table.lines_.push_back(line_no);
  }
  if (table.header_.empty()) throw ConfigError(table.source_ + ": empty CSV");
  return table;
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header_)
    if (h == name) return true;
  return false;
}

std::size_t CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw ConfigError(fmt::format("{}: missing column '{}'", source_, name));
}

const std::string& CsvTable::cell(std::size_t row, std::string_view column) const {
  return rows_.at(row).at(column_index(column));
}

double CsvTable::number(std::size_t row, std::string_view column) const {
  const std::string& text = cell(row, column);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("{}:{}: column '{}' is not a number: '{}'", source_,
                                  lines_.at(row), column, text));
  }
  return value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  return fmt::format("{}", value);  // shortest form that round-trips
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  for (const auto& h : header) add(h);
  end_row();
}

CsvWriter::~CsvWriter() {
  if (closed_) return;
  try {
    close();
  } catch (...) {
  }
}

void CsvWriter::close() {
  closed_ = true;
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  out << buffer_;
  if (!out) throw std::runtime_error("failed writing " + path_.string());
}

CsvWriter& CsvWriter::add(std::string_view text) {
  row_.emplace_back(text);
  return *this;
}

CsvWriter& CsvWriter::add(double value) { return add(format_number(value)); }

CsvWriter& CsvWriter::add(int value) { return add(std::to_string(value)); }

void CsvWriter::end_row() {
  if (row_.size() != columns_) {
    throw std::logic_error(fmt::format("{}: row has {} cells, header has {}", path_.string(),
                                       row_.size(), columns_));
  }
  for (std::size_t i = 0; i < row_.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += row_[i];
  }
  buffer_ += '\n';
  row_.clear();
}

}  // namespace nzsim
