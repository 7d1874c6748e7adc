#include "echobeat/tensor_io.hpp"

#include "echobeat/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace echobeat {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'H', 'T', '1'};
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCode::Format, what); }

void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) format_error(std::string("truncated tensor ") + what);
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_tensor(std::ostream& out, const Tensor& t) {
  if (t.dims.size() > 255) format_error("tensor has more than 255 dimensions");
  if (t.values.size() != t.element_count()) {
    throw Error(ErrorCode::ShapeMismatch, "tensor payload does not match its dims",
                {{"expected", std::to_string(t.element_count())},
                 {"got", std::to_string(t.values.size())}});
  }
  out.write(kMagic.data(), 4);
  const char header[4] = {static_cast<char>(kDtypeF32), static_cast<char>(t.dims.size()), 0, 0};
  out.write(header, 4);
  for (auto d : t.dims) put_u32(out, d);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(float)));
  } else {
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing tensor");
}

Tensor read_tensor(std::istream& in) {
  unsigned char header[8];
  read_exact(in, header, sizeof header, "header");
  if (std::memcmp(header, kMagic.data(), 4) != 0) format_error("bad tensor magic (expected EHT1)");
  if (header[4] != kDtypeF32) format_error("unsupported tensor dtype " + std::to_string(header[4]));
  if (header[6] != 0 || header[7] != 0) format_error("tensor header pad bytes must be zero");

  Tensor t;
  t.dims.resize(header[5]);
  std::vector<unsigned char> dim_bytes(4 * t.dims.size());
  read_exact(in, dim_bytes.data(), dim_bytes.size(), "dims");
  for (std::size_t i = 0; i < t.dims.size(); ++i) t.dims[i] = get_u32(dim_bytes.data() + 4 * i);

  std::uint64_t n64 = 1;
  for (auto d : t.dims) {
    n64 *= d;
    if (n64 > kMaxElements) format_error("tensor dims exceed the supported element count");
  }
  const auto n = static_cast<std::size_t>(n64);
  std::vector<unsigned char> payload(4 * n);
  read_exact(in, payload.data(), payload.size(), "payload");
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.values[i] = std::bit_cast<float>(get_u32(payload.data() + 4 * i));
  if (in.peek() != std::char_traits<char>::eof()) format_error("trailing bytes after tensor payload");
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open tensor file for writing", {{"path", path.string()}});
  write_tensor(out, t);
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open tensor file", {{"path", path.string()}});
  try {
    return read_tensor(in);
  } catch (const Error& e) {
    auto ctx = e.context();
    ctx["path"] = path.string();
    throw Error(e.code(), e.what(), ctx);
  }
}

Tensor to_tensor(const HeatmapStack& stack) {
  const Extent e = stack.extent();
  return Tensor{{static_cast<std::uint32_t>(stack.frames()), static_cast<std::uint32_t>(kNumChannels),
                 static_cast<std::uint32_t>(e.height), static_cast<std::uint32_t>(e.width)},
                std::vector<float>(stack.values().begin(), stack.values().end())};
}

HeatmapStack to_stack(Tensor t) {
  if (t.dims.size() != 4 || t.dims[1] != kNumChannels) {
    std::string shape;
    for (auto d : t.dims) shape += (shape.empty() ? "" : "x") + std::to_string(d);
    throw Error(ErrorCode::ShapeMismatch, "heatmap tensor must have dims [F, 4, H, W]",
                {{"dims", shape}});
  }
  return HeatmapStack(t.dims[0], Extent{t.dims[2], t.dims[3]}, std::move(t.values));
}

}  // namespace echobeat
