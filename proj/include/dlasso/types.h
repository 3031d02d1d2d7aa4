#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dlasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Index set into a gamma-type vector (0-based over the p-1 coordinates
/// x_2..x_p; coordinate j of gamma corresponds to variable j+2).
using IndexSet = std::vector<Index>;

/// Complement of `set` in {0, ..., size-1}, ascending.
IndexSet complement(const IndexSet& set, Index size);

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols);
Vector subvector(const Vector& v, const IndexSet& idx);

/// max_j sum_k |a_jk|
double l1_operator_norm(const Matrix& a);

double soft_threshold(double value, double threshold);

}  // namespace dlasso
