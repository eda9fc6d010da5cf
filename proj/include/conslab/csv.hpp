#pragma once

// CSV artifacts. Every file opens with "# config_hash=<hex> seed=<n>" and a
// header row; numbers use the shortest round-trip representation.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conslab::cli {

[[nodiscard]] inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, const std::string& config_hash,
            std::uint64_t seed)
      : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << "# config_hash=" << config_hash << " seed=" << seed << '\n';
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }

  CsvWriter& cell(double v) { return raw(format_number(v)); }
  CsvWriter& cell(std::int64_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::string_view s) { return raw(std::string(s)); }
  CsvWriter& blank() { return raw(""); }

  void end_row() {
    const auto filled = filled_;
    filled_ = 0;
    if (filled != columns_) {
      row_.clear();
      throw std::logic_error("csv row has the wrong number of cells");
    }
    out_ << row_ << '\n';
    row_.clear();
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (filled_) row_ += ',';
    row_ += s;
    ++filled_;
    return *this;
  }

  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::string row_;
};

// Numeric CSV as written above. Empty or non-numeric cells read as NaN.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    return std::nullopt;
  }
  [[nodiscard]] std::size_t column(std::string_view name) const {
    if (auto k = find_column(name)) return *k;
    throw std::invalid_argument("csv has no column '" + std::string(name) + "'");
  }
  [[nodiscard]] std::vector<double> values(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(col < r.size() ? r[col] : std::numeric_limits<double>::quiet_NaN());
    return out;
  }
};

[[nodiscard]] inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

[[nodiscard]] inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv)
        if (auto eq = kv.find('='); eq != std::string::npos) t.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
      continue;
    }
    if (t.header.empty()) {
      t.header = split_csv_line(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty()) {
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) v = std::numeric_limits<double>::quiet_NaN();
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw std::runtime_error("'" + path.string() + "' has no header row");
  return t;
}

}  // namespace conslab::cli
