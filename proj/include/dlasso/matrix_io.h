#pragma once

#include <string>

#include "dlasso/types.h"

namespace dlasso {

/// Plain-text matrix: one row per line, comma separated, no header.
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m);

/// A single column or a single row CSV read as a vector.
Vector read_csv_vector(const std::string& path);
void write_csv_vector(const std::string& path, const Vector& v);

/// Binary layout: uint32 rows, uint32 cols (little endian), then rows*cols
/// little-endian f64 in row-major order.
Matrix read_binary_matrix(const std::string& path);
void write_binary_matrix(const std::string& path, const Matrix& m);

/// Reads a covariance matrix by extension (.bin binary, otherwise CSV) and
/// rejects non-symmetric input.
Matrix read_symmetric_matrix(const std::string& path);

/// "%.17g" formatting used by every CSV writer.
std::string format_double(double value);

}  // namespace dlasso
