#pragma once

#include "tbm/tensor.hpp"

#include <vector>

namespace tbm::detail {

// Visits every entry of a tensor of `shape` in canonical order. maps[m][j] is
// the output coordinate of index j along mode m, and the callback receives
// (flat input index, flat output index) for an output tensor of shape `out`.
template <typename Fn>
void for_each_mapped(const Shape& shape, const std::vector<std::vector<int>>& maps, const Shape& out, Fn&& fn) {
  const std::size_t d = shape.order();
  const auto strides = out.strides();
  std::vector<std::size_t> index(d, 0);
  std::size_t offset = 0;
  for (std::size_t m = 0; m < d; ++m) offset += static_cast<std::size_t>(maps[m][0]) * strides[m];
  for (std::size_t flat = 0; flat < shape.total(); ++flat) {
    fn(flat, offset);
    for (std::size_t m = d; m-- > 0;) {
      const auto before = static_cast<std::size_t>(maps[m][index[m]]) * strides[m];
      if (++index[m] < shape[m]) {
        offset = offset - before + static_cast<std::size_t>(maps[m][index[m]]) * strides[m];
        break;
      }
      index[m] = 0;
      offset = offset - before + static_cast<std::size_t>(maps[m][0]) * strides[m];
    }
  }
}

inline std::vector<int> identity_map(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

}  // namespace tbm::detail
