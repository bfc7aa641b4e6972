#pragma once

// Seeded random streams with a pinned algorithm so that outputs are identical
// across platforms and standard libraries.
//
//   state_{n+1} = state_n + 0x9E3779B97F4A7C15
//   output      = splitmix64 finalizer of state_{n+1}
//   uniform     = (output >> 11) * 2^-53                     in [0, 1)
//   index(n)    = Lemire multiply-shift with rejection      in [0, n)
//   normal      = Box-Muller on (1 - u1, u2), both outputs used in order

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <vector>

namespace tbm {

std::uint64_t splitmix64_mix(std::uint64_t x);

/// Combines a base seed with coordinates into a new, well-mixed seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

class Random {
 public:
  explicit Random(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();
  std::size_t index(std::size_t n);
  double normal();

  /// Uniformly chosen `count` distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::uint64_t state_;
  std::optional<double> spare_;
};

}  // namespace tbm
