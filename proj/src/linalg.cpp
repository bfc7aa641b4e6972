#include "tbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tbm {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("linalg: non-finite input");
}

struct GramSpectrum {
  Vector values;   // descending, clamped at rounding level
  Matrix vectors;  // matching columns
};

GramSpectrum spectrum(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("linalg: eigensolver failed");
  const Eigen::Index n = gram.rows();
  GramSpectrum s{eig.eigenvalues().reverse(), eig.eigenvectors().rowwise().reverse()};
  const double top = n > 0 ? std::max(s.values(0), 0.0) : 0.0;
  // Gram eigenvalues below this are indistinguishable from zero.
  const double floor = 8.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.values(i) <= floor) s.values(i) = 0.0;
  }
  return s;
}

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0) v = -v;
}

// Projects v off the first `count` columns of u (two passes).
void orthogonalize(const Matrix& u, Eigen::Index count, Vector& v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < count; ++c) v -= u.col(c).dot(v) * u.col(c);
  }
}

}  // namespace

OrthonormalBasis::OrthonormalBasis(Matrix m) : m_(std::move(m)) {
  if (orthonormality_error(m_) > 1e-8) {
    throw std::invalid_argument("OrthonormalBasis: columns are not orthonormal");
  }
}

double orthonormality_error(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

OrthonormalBasis top_left_singular_vectors(const Matrix& m, std::size_t r) {
  require_finite(m);
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  if (r < 1 || r > std::min(rows, cols)) {
    throw std::invalid_argument("top_left_singular_vectors: r = " + std::to_string(r) +
                                " outside [1, " + std::to_string(std::min(rows, cols)) + "]");
  }
  const auto width = static_cast<Eigen::Index>(r);
  Matrix u = Matrix::Zero(m.rows(), width);
  Eigen::Index kept = 0;

  if (rows <= cols) {
    const GramSpectrum s = spectrum(m * m.transpose());
    for (Eigen::Index i = 0; i < width && s.values(i) > 0.0; ++i) {
      Vector v = s.vectors.col(i);
      orthogonalize(u, kept, v);
      u.col(kept++) = v.normalized();
    }
  } else {
    const GramSpectrum s = spectrum(m.transpose() * m);
    for (Eigen::Index i = 0; i < width && s.values(i) > 0.0; ++i) {
      Vector v = m * s.vectors.col(i) / std::sqrt(s.values(i));
      orthogonalize(u, kept, v);
      const double norm = v.norm();
      if (norm < 1e-6) break;
      u.col(kept++) = v / norm;
    }
  }
  for (Eigen::Index c = 0; c < kept; ++c) fix_sign(u.col(c));

  // Complete against e_0, e_1, ... in order.
  for (Eigen::Index j = 0; kept < width && j < m.rows(); ++j) {
    Vector v = Vector::Unit(m.rows(), j);
    orthogonalize(u, kept, v);
    const double norm = v.norm();
    if (norm < 1e-6) continue;
    u.col(kept) = v / norm;
    fix_sign(u.col(kept));
    ++kept;
  }
  return OrthonormalBasis(std::move(u));
}

std::vector<double> singular_values(const Matrix& m) {
  require_finite(m);
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  const GramSpectrum s = spectrum(gram);
  std::vector<double> out(static_cast<std::size_t>(s.values.size()));
  for (Eigen::Index i = 0; i < s.values.size(); ++i) out[static_cast<std::size_t>(i)] = std::sqrt(s.values(i));
  return out;
}

double projector_distance(const Matrix& a, const Matrix& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

}  // namespace tbm
