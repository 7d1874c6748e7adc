#pragma once

#include "echobeat/heatmap.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace echobeat {

// EHT1 tensor file, little-endian throughout:
//   magic    "EHT1"            4 bytes
//   dtype    u8                0 = float32
//   ndim     u8
//   pad      2 zero bytes
//   dims     ndim x u32
//   payload  product(dims) x f32, row-major
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

void write_tensor(std::ostream& out, const Tensor& t);
/// Throws Format on a bad header, truncated payload or trailing bytes.
Tensor read_tensor(std::istream& in);

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

Tensor to_tensor(const HeatmapStack& stack);
/// Requires dims [F, 4, H, W]; throws ShapeMismatch otherwise.
HeatmapStack to_stack(Tensor t);

}  // namespace echobeat
