#include "tbm/tensor.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tbm {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'B', 'M', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw std::runtime_error("TBM1: truncated input");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_tbm1(std::ostream& out, const DenseTensor& t) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  for (std::size_t e : t.shape().dims()) {
    if (e > UINT32_MAX) throw std::invalid_argument("TBM1: extent exceeds u32");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
  }
  for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw std::runtime_error("TBM1: write failed");
}

DenseTensor read_tbm1(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("TBM1: bad magic");
  const auto order = get_le<std::uint32_t>(in);
  if (order < 2 || order > 64) throw std::runtime_error("TBM1: unsupported order");
  std::vector<std::size_t> dims(order);
  for (auto& e : dims) {
    e = get_le<std::uint32_t>(in);
    if (e == 0) throw std::runtime_error("TBM1: zero extent");
  }
  Shape shape(std::move(dims));
  std::vector<double> data(shape.total());
  for (double& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  try {
    return DenseTensor(std::move(shape), std::move(data));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("TBM1: ") + e.what());
  }
}

void save_tbm1(const std::string& path, const DenseTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_tbm1(out, t);
}

DenseTensor load_tbm1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_tbm1(in);
}

}  // namespace tbm
