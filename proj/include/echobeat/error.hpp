#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace echobeat {

enum class ErrorCode {
  MissingKeypoint,
  DegenerateSegment,
  ShapeMismatch,
  EmptyChannel,
  AllGaps,
  NoBeatsDetected,
  EmptyBeats,
  InsufficientBeats,
  LengthMismatch,
  DegenerateVariance,
  SingleClass,
  BootstrapDegenerate,
  InvalidConfig,
  InvalidExtent,
  Format,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every library failure is reported as an Error carrying a stable code plus
/// free-form key/value context, which the CLI serializes as error JSON.
class Error : public std::runtime_error {
public:
  using Context = std::map<std::string, std::string>;

  Error(ErrorCode code, const std::string& message, Context context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const Context& context() const noexcept { return context_; }

private:
  ErrorCode code_;
  Context context_;
};

/// SplitMix64 finalizer; used to derive independent, order-insensitive
/// RNG substreams (per frame, per channel, per bootstrap resample) from one seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ull));
}

}  // namespace echobeat
