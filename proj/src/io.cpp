#include "gml/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gml {

std::string format_sig(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void write_csv_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_sig(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_csv_matrix(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(field, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field '" + field + "'");
      }
      while (pos < field.size() &&
             (field[pos] == ' ' || field[pos] == '\t' || field[pos] == '\r'))
        ++pos;
      if (pos != field.size())
        throw std::runtime_error("bad numeric field '" + field + "'");
      row.push_back(v);
    }
    if (row.empty()) throw std::runtime_error("empty csv row");
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged csv: row " +
                               std::to_string(rows.size() + 1) + " has " +
                               std::to_string(row.size()) + " fields");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty csv input");
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_csv_matrix(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv_matrix(out, m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Histogram read_histogram_file(const std::string& path) {
  Matrix m = read_matrix_file(path);
  if (m.rows() != 1 && m.cols() != 1)
    throw std::runtime_error(path + ": expected a single row or column");
  Vector v = m.rows() == 1 ? Vector(m.row(0).transpose()) : Vector(m.col(0));
  return Histogram(v);
}

}  // namespace gml
