#pragma once

// Truncated SVD primitives computed from the eigendecomposition of the smaller
// Gram matrix.

#include "tbm/tensor.hpp"

#include <vector>

namespace tbm {

/// A p x r matrix with orthonormal columns.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  /// Throws if the columns are not orthonormal to 1e-8.
  explicit OrthonormalBasis(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }

  /// U U^T.
  Matrix projector() const { return m_ * m_.transpose(); }

 private:
  Matrix m_;
};

/// ||U^T U - I||_F.
double orthonormality_error(const Matrix& u);

/// Top-r left singular vectors (SVD_r). Each vector has its largest-magnitude
/// entry positive. When rank(m) < r the missing columns are a Gram-Schmidt
/// completion against canonical vectors in index order.
OrthonormalBasis top_left_singular_vectors(const Matrix& m, std::size_t r);

/// All min(rows, cols) singular values in descending order.
std::vector<double> singular_values(const Matrix& m);

/// ||P_a - P_b||_F for the projectors onto two column spaces.
double projector_distance(const Matrix& a, const Matrix& b);

}  // namespace tbm
