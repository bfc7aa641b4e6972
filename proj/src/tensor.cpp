#include "tbm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tbm {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

void require_mode(const Shape& shape, std::size_t mode) {
  if (mode >= shape.order()) {
    throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for order-" +
                                std::to_string(shape.order()) + " tensor");
  }
}

// Column stride of every mode in the mode-k unfolding (entry k unused).
std::vector<std::size_t> unfold_column_strides(const Shape& shape, std::size_t mode) {
  const std::size_t d = shape.order();
  std::vector<std::size_t> strides(d, 0);
  std::size_t stride = 1;
  // Cyclic order k+1, ..., d-1, 0, ..., k-1 with the last one fastest.
  for (std::size_t step = 1; step < d; ++step) {
    const std::size_t m = (mode + d - step) % d;
    strides[m] = stride;
    stride *= shape[m];
  }
  return strides;
}

// Visits every entry in canonical order, passing (flat, row, column) of the
// mode-k unfolding.
template <typename Fn>
void for_each_unfolded(const Shape& shape, std::size_t mode, Fn&& fn) {
  const std::size_t d = shape.order();
  const auto col_strides = unfold_column_strides(shape, mode);
  std::vector<std::size_t> index(d, 0);
  std::size_t col = 0;
  for (std::size_t flat = 0; flat < shape.total(); ++flat) {
    fn(flat, index[mode], col);
    for (std::size_t m = d; m-- > 0;) {
      if (++index[m] < shape[m]) {
        col += col_strides[m];
        break;
      }
      col -= (shape[m] - 1) * col_strides[m];
      index[m] = 0;
    }
  }
}

}  // namespace

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) {
    throw std::invalid_argument("tensor order must be at least 2");
  }
  total_ = 1;
  for (std::size_t e : dims_) {
    if (e == 0) throw std::invalid_argument("tensor extents must be positive");
    if (total_ > std::numeric_limits<std::size_t>::max() / e) {
      throw std::invalid_argument("tensor too large");
    }
    total_ *= e;
  }
}

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

std::size_t Shape::total_without(std::size_t mode) const { return total_ / dims_.at(mode); }

std::size_t Shape::max_extent() const { return *std::max_element(dims_.begin(), dims_.end()); }

std::size_t Shape::min_extent() const { return *std::min_element(dims_.begin(), dims_.end()); }

Shape Shape::with_extent(std::size_t mode, std::size_t extent) const {
  auto dims = dims_;
  dims.at(mode) = extent;
  return Shape(std::move(dims));
}

std::vector<std::size_t> Shape::strides() const {
  std::vector<std::size_t> s(dims_.size(), 1);
  for (std::size_t m = dims_.size(); m-- > 1;) s[m - 1] = s[m] * dims_[m];
  return s;
}

std::string Shape::to_string() const {
  std::ostringstream os;
  for (std::size_t m = 0; m < dims_.size(); ++m) os << (m ? "x" : "") << dims_[m];
  return os.str();
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)), data_(shape_.total(), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.total()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_.to_string());
  }
  require_finite(data_, "DenseTensor");
}

DenseTensor DenseTensor::constant(Shape shape, double value) {
  std::vector<double> data(shape.total(), value);
  return DenseTensor(std::move(shape), std::move(data));
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != order()) throw std::invalid_argument("index arity mismatch");
  std::size_t flat = 0;
  for (std::size_t m = 0; m < index.size(); ++m) {
    if (index[m] >= shape_[m]) throw std::out_of_range("tensor index out of range");
    flat = flat * shape_[m] + index[m];
  }
  return flat;
}

double DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (shape_ != other.shape_) throw std::invalid_argument("tensor shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  if (shape_ != other.shape_) throw std::invalid_argument("tensor shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(DenseTensor a, double scale) { return a *= scale; }

bool next_index(std::vector<std::size_t>& index, const Shape& shape) {
  for (std::size_t m = index.size(); m-- > 0;) {
    if (++index[m] < shape[m]) return true;
    index[m] = 0;
  }
  return false;
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  const Shape& shape = t.shape();
  require_mode(shape, mode);
  Matrix m(shape[mode], shape.total_without(mode));
  for_each_unfolded(shape, mode, [&](std::size_t flat, std::size_t row, std::size_t col) {
    m(row, col) = t[flat];
  });
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
  require_mode(shape, mode);
  if (static_cast<std::size_t>(m.rows()) != shape[mode] ||
      static_cast<std::size_t>(m.cols()) != shape.total_without(mode)) {
    throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", shape " + shape.to_string() +
                                " needs " + std::to_string(shape[mode]) + "x" +
                                std::to_string(shape.total_without(mode)));
  }
  std::vector<double> data(shape.total());
  for_each_unfolded(shape, mode, [&](std::size_t flat, std::size_t row, std::size_t col) {
    data[flat] = m(row, col);
  });
  return DenseTensor(shape, std::move(data));
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& u, std::size_t mode) {
  require_mode(t.shape(), mode);
  if (static_cast<std::size_t>(u.cols()) != t.shape()[mode]) {
    throw std::invalid_argument("mode_product: factor has " + std::to_string(u.cols()) +
                                " columns, mode extent is " + std::to_string(t.shape()[mode]));
  }
  if (u.rows() == 0) throw std::invalid_argument("mode_product: empty factor");
  const Matrix product = u * unfold(t, mode);
  return fold(product, mode, t.shape().with_extent(mode, static_cast<std::size_t>(u.rows())));
}

DenseTensor multi_product(const DenseTensor& t, std::span<const ModeFactor> factors) {
  std::vector<bool> seen(t.order(), false);
  for (const auto& f : factors) {
    require_mode(t.shape(), f.mode);
    if (seen[f.mode]) throw std::invalid_argument("multi_product: duplicate mode");
    seen[f.mode] = true;
  }
  DenseTensor result = t;
  for (const auto& f : factors) result = mode_product(result, f.matrix.get(), f.mode);
  return result;
}

DenseTensor multi_product(const DenseTensor& t, std::initializer_list<ModeFactor> factors) {
  return multi_product(t, std::span<const ModeFactor>(factors.begin(), factors.size()));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

Matrix kron_chain_except(std::span<const Matrix> factors, std::size_t mode) {
  const std::size_t d = factors.size();
  if (mode >= d || d < 2) throw std::invalid_argument("kron_chain_except: bad mode");
  Matrix chain = factors[(mode + 1) % d];
  for (std::size_t step = 2; step < d; ++step) chain = kron(chain, factors[(mode + step) % d]);
  return chain;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frobenius(const DenseTensor& a) { return std::sqrt(inner(a, a)); }

}  // namespace tbm
