#include "mrgp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mrgp/errors.hpp"

namespace mrgp {

Standardizer Standardizer::fit(const Eigen::Ref<const Matrix>& y) {
  Standardizer s;
  s.mean = y.colwise().mean().transpose();
  const Index n = y.rows();
  s.std.resize(y.cols());
  for (Index d = 0; d < y.cols(); ++d) {
    const double var = (y.col(d).array() - s.mean[d]).square().sum() / static_cast<double>(n);
    s.std[d] = std::sqrt(var);
    if (!(s.std[d] > 0.0))
      throw DataError("standardizer: output dimension " + std::to_string(d) +
                      " has zero variance on the training split");
  }
  return s;
}

Matrix Standardizer::apply(const Eigen::Ref<const Matrix>& y) const {
  return (y.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Matrix Standardizer::invert(const Eigen::Ref<const Matrix>& y_std) const {
  return (y_std.array().rowwise() * std.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

void Dataset::sort_by_input() {
  if (dx() != 1) return;
  std::vector<Index> order(n());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return x(a, 0) < x(b, 0); });
  Matrix xs(x.rows(), x.cols()), ys(y.rows(), y.cols());
  for (Index t = 0; t < n(); ++t) {
    xs.row(t) = x.row(order[t]);
    ys.row(t) = y.row(order[t]);
  }
  x = std::move(xs);
  y = std::move(ys);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\r' || *(end - 1) == '\t'))
    --end;
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw DataError("csv: non-numeric cell at data row " + std::to_string(row + 1) +
                    ", column " + std::to_string(col + 1) + ": '" + cell + "'");
  if (!std::isfinite(value))
    throw DataError("csv: non-finite value at data row " + std::to_string(row + 1) +
                    ", column " + std::to_string(col + 1));
  return value;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  table.header = split_line(line);
  const std::size_t ncol = table.header.size();

  std::vector<double> data;
  std::size_t nrow = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != ncol)
      throw DataError("csv: row " + std::to_string(nrow + 1) + " has " +
                      std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(ncol));
    for (std::size_t c = 0; c < ncol; ++c) data.push_back(parse_cell(cells[c], nrow, c));
    ++nrow;
  }
  if (nrow == 0) throw DataError("csv: '" + path + "' has no data rows");

  table.values.resize(nrow, ncol);
  for (std::size_t r = 0; r < nrow; ++r)
    for (std::size_t c = 0; c < ncol; ++c)
      table.values(r, c) = data[r * ncol + c];
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::Ref<const Matrix>& values) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write '" + path + "'");
  out.precision(17);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? "," : "\n");
  for (Index r = 0; r < values.rows(); ++r)
    for (Index c = 0; c < values.cols(); ++c)
      out << values(r, c) << (c + 1 < values.cols() ? "," : "\n");
  if (!out) throw DataError("csv: failed while writing '" + path + "'");
}

Dataset load_csv(const std::string& path, const std::vector<int>& x_cols,
                 const std::vector<int>& y_cols) {
  const CsvTable table = read_csv(path);
  const int ncol = static_cast<int>(table.header.size());
  auto check = [&](const std::vector<int>& cols) {
    for (int c : cols)
      if (c < 0 || c >= ncol)
        throw DataError("csv: column index " + std::to_string(c) +
                        " out of range (file has " + std::to_string(ncol) + " columns)");
  };
  check(x_cols);
  check(y_cols);

  Dataset out;
  out.x.resize(table.values.rows(), static_cast<Index>(x_cols.size()));
  out.y.resize(table.values.rows(), static_cast<Index>(y_cols.size()));
  for (std::size_t i = 0; i < x_cols.size(); ++i) {
    out.x.col(i) = table.values.col(x_cols[i]);
    out.x_names.push_back(table.header[x_cols[i]]);
  }
  for (std::size_t i = 0; i < y_cols.size(); ++i) {
    out.y.col(i) = table.values.col(y_cols[i]);
    out.y_names.push_back(table.header[y_cols[i]]);
  }
  return out;
}

}  // namespace mrgp
