#include "dlasso/types.h"

#include <algorithm>
#include <cmath>

namespace dlasso {

IndexSet complement(const IndexSet& set, Index size) {
  std::vector<bool> in(static_cast<size_t>(size), false);
  for (Index i : set) in[static_cast<size_t>(i)] = true;
  IndexSet out;
  out.reserve(static_cast<size_t>(size) - set.size());
  for (Index i = 0; i < size; ++i) {
    if (!in[static_cast<size_t>(i)]) out.push_back(i);
  }
  return out;
}

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    for (size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Index>(i), static_cast<Index>(j)) = a(rows[i], cols[j]);
    }
  }
  return out;
}

Vector subvector(const Vector& v, const IndexSet& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

double l1_operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

}  // namespace dlasso
