#pragma once

// Dense order-d tensors, matricization, and multilinear products.
//
// Storage is a flat array of doubles in canonical lexicographic order with the
// LAST index varying fastest. Modes are 0-based throughout the library.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<std::size_t> dims);
  Shape(std::initializer_list<std::size_t> dims);

  std::size_t order() const { return dims_.size(); }
  std::size_t operator[](std::size_t mode) const { return dims_[mode]; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Total number of entries, p_*.
  std::size_t total() const { return total_; }
  /// Product of all extents except `mode`, p_{-k}.
  std::size_t total_without(std::size_t mode) const;
  std::size_t max_extent() const;
  std::size_t min_extent() const;

  /// Same shape with extent `mode` replaced.
  Shape with_extent(std::size_t mode, std::size_t extent) const;

  /// Row-major strides (last mode has stride 1).
  std::vector<std::size_t> strides() const;

  bool operator==(const Shape& other) const = default;

  std::string to_string() const;

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 0;
};

class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor.
  explicit DenseTensor(Shape shape);
  /// Takes ownership of `data`; length must equal the shape total and every value must be finite.
  DenseTensor(Shape shape, std::vector<double> data);

  static DenseTensor constant(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.order(); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  double at(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  std::size_t flat_index(std::span<const std::size_t> index) const;

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double scale);

  bool operator==(const DenseTensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(DenseTensor a, double scale);

/// Advances a row-major multi-index; returns false after the last entry.
bool next_index(std::vector<std::size_t>& index, const Shape& shape);

/// Mode-k matricization, p_k x p_{-k}. Column c enumerates the other indices in
/// cyclic order (k+1, ..., d-1, 0, ..., k-1) with the last of them fastest, so
///   unfold(S x_0 U_0 ... x_{d-1} U_{d-1}, k)
///     = U_k unfold(S, k) (U_{k+1} (x) ... (x) U_{d-1} (x) U_0 (x) ... (x) U_{k-1})^T.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold.
DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

/// t x_k u: replaces extent p_k by u.rows().
DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode);

struct ModeFactor {
  std::size_t mode;
  std::reference_wrapper<const Matrix> matrix;
};

/// Successive mode products; at most one factor per mode.
DenseTensor multi_product(const DenseTensor& t, std::span<const ModeFactor> factors);
DenseTensor multi_product(const DenseTensor& t, std::initializer_list<ModeFactor> factors);

Matrix kron(const Matrix& a, const Matrix& b);

/// U_{k+1} (x) ... (x) U_{d-1} (x) U_0 (x) ... (x) U_{k-1}.
Matrix kron_chain_except(std::span<const Matrix> factors, std::size_t mode);

double inner(const DenseTensor& a, const DenseTensor& b);
double frobenius(const DenseTensor& a);

// TBM1 binary format: "TBM1", u32 order, order x u32 extents, then the entries
// as little-endian f64 in canonical layout.
void write_tbm1(std::ostream& out, const DenseTensor& t);
DenseTensor read_tbm1(std::istream& in);
void save_tbm1(const std::string& path, const DenseTensor& t);
DenseTensor load_tbm1(const std::string& path);

}  // namespace tbm
