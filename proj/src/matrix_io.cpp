#include "dlasso/matrix_io.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "dlasso/error.h"

namespace dlasso {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary matrix format assumes a little-endian host");

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        throw Error(ErrorCode::kParseError,
                    path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) +
                                              ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_symmetric(const Matrix& m, const std::string& path) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::kNotSymmetric, path + ": matrix not square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw Error(ErrorCode::kNotSymmetric, path + ": matrix not symmetric", asym);
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Matrix read_csv_matrix(const std::string& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::kParseError, path + ": empty matrix file");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Vector read_csv_vector(const std::string& path) {
  const Matrix m = read_csv_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw Error(ErrorCode::kParseError, path + ": expected a single row or column");
}

void write_csv_vector(const std::string& path, const Vector& v) {
  write_csv_matrix(path, Matrix(v));
}

Matrix read_binary_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::uint32_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in) throw Error(ErrorCode::kParseError, path + ": truncated header");
  const Index rows = dims[0];
  const Index cols = dims[1];
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf(rows, cols);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(rows * cols)));
  if (!in) throw Error(ErrorCode::kParseError, path + ": truncated payload");
  return buf;
}

void write_binary_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()),
                                 static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf = m;
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

Matrix read_symmetric_matrix(const std::string& path) {
  const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  Matrix m = binary ? read_binary_matrix(path) : read_csv_matrix(path);
  check_symmetric(m, path);
  return m;
}

}  // namespace dlasso
