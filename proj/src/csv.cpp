#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "madrp/error.hpp"
#include "madrp/scenarios.hpp"

namespace madrp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
  if (cell.empty()) {
    throw CellError("empty cell at row " + std::to_string(row) + ", column " +
                        std::to_string(col),
                    row, col);
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw CellError("unparsable cell '" + std::string(cell) + "' at row " +
                        std::to_string(row) + ", column " + std::to_string(col),
                    row, col);
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

PriceSeries parse_csv(std::istream& in, const CsvLayout& layout) {
  PriceSeries out;
  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool have_header = !layout.header;
  const std::size_t first_value_col = layout.date_column ? 1 : 0;

  while (std::getline(in, line)) {
    const std::size_t row = line_no++;
    if (trim(line).empty()) continue;
    auto cells = split(line, layout.delimiter);
    if (!have_header) {
      have_header = true;
      if (cells.size() <= first_value_col) {
        throw CellError("header has no asset columns", row, 0);
      }
      std::set<std::string> seen;
      for (std::size_t c = first_value_col; c < cells.size(); ++c) {
        std::string id(cells[c]);
        if (id.empty()) throw CellError("empty asset id in header", row, c);
        if (!seen.insert(id).second) {
          throw CellError("duplicate asset id '" + id + "'", row, c);
        }
        out.asset_ids.push_back(std::move(id));
      }
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw CellError("row " + std::to_string(row) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(width),
                      row, std::min(cells.size(), width));
    }
    if (layout.date_column) {
      if (cells[0].empty()) throw CellError("empty date cell", row, 0);
      dates.emplace_back(cells[0]);
    }
    std::vector<double> values;
    values.reserve(width - first_value_col);
    for (std::size_t c = first_value_col; c < width; ++c) {
      values.push_back(parse_number(cells[c], row, c));
    }
    rows.push_back(std::move(values));
  }

  if (width <= first_value_col) throw InputError("CSV has no asset columns");
  if (rows.size() < 2) {
    throw InputError("CSV needs at least 2 price rows, got " + std::to_string(rows.size()));
  }
  const std::size_t n = width - first_value_col;
  if (out.asset_ids.empty()) {
    for (std::size_t i = 0; i < n; ++i) out.asset_ids.push_back("asset_" + std::to_string(i + 1));
  }
  out.prices.resize(static_cast<Index>(rows.size()), static_cast<Index>(n));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      out.prices(static_cast<Index>(t), static_cast<Index>(i)) = rows[t][i];
    }
  }
  if (layout.date_column) out.dates = std::move(dates);
  return out;
}

PriceSeries load_csv(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_csv(in, layout);
}

void write_csv(std::ostream& out, const PriceSeries& prices, const CsvLayout& layout) {
  const char d = layout.delimiter;
  const bool with_dates = layout.date_column;
  if (with_dates && !prices.dates) throw InputError("layout requires dates but series has none");
  if (layout.header) {
    if (with_dates) out << "date" << d;
    for (std::size_t i = 0; i < prices.asset_ids.size(); ++i) {
      if (i) out << d;
      out << prices.asset_ids[i];
    }
    out << '\n';
  }
  for (Index t = 0; t < prices.num_rows(); ++t) {
    if (with_dates) out << (*prices.dates)[static_cast<std::size_t>(t)] << d;
    for (Index i = 0; i < prices.num_assets(); ++i) {
      if (i) out << d;
      out << format_double(prices.prices(t, i));
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const PriceSeries& prices,
              const CsvLayout& layout) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, prices, layout);
}

}  // namespace madrp
