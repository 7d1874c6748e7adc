#pragma once

#include "echobeat/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace echobeat {

struct Extent {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixels() const noexcept { return height * width; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Non-owning view of one 4 x H x W activation frame (channel-major, row-major).
class FrameView {
public:
  FrameView(std::span<const float> values, Extent extent);

  Extent extent() const noexcept { return extent_; }
  std::span<const float> values() const noexcept { return values_; }
  std::span<const float> channel(Channel c) const {
    return values_.subspan(index(c) * extent_.pixels(), extent_.pixels());
  }
  float at(Channel c, std::size_t row, std::size_t col) const {
    return values_[index(c) * extent_.pixels() + row * extent_.width + col];
  }

private:
  std::span<const float> values_;
  Extent extent_;
};

/// Owning 4 x H x W frame. Also serves as the rasterized training label.
class HeatmapFrame {
public:
  HeatmapFrame() = default;
  explicit HeatmapFrame(Extent extent);
  HeatmapFrame(Extent extent, std::vector<float> values);

  Extent extent() const noexcept { return extent_; }
  FrameView view() const { return FrameView(values_, extent_); }
  operator FrameView() const { return view(); }

  std::span<float> values() noexcept { return values_; }
  std::span<const float> values() const noexcept { return values_; }
  std::span<float> channel(Channel c) {
    return std::span<float>(values_).subspan(index(c) * extent_.pixels(), extent_.pixels());
  }
  float& at(Channel c, std::size_t row, std::size_t col) {
    return values_[index(c) * extent_.pixels() + row * extent_.width + col];
  }
  float at(Channel c, std::size_t row, std::size_t col) const { return view().at(c, row, col); }

  friend bool operator==(const HeatmapFrame&, const HeatmapFrame&) = default;

private:
  Extent extent_{};
  std::vector<float> values_;
};

using LabelImage = HeatmapFrame;

/// F x 4 x H x W activation tensor.
class HeatmapStack {
public:
  HeatmapStack() = default;
  explicit HeatmapStack(Extent extent) : extent_(extent) {}
  HeatmapStack(std::size_t frames, Extent extent, std::vector<float> values);

  std::size_t frames() const noexcept { return frames_; }
  Extent extent() const noexcept { return extent_; }
  std::size_t frame_size() const noexcept { return kNumChannels * extent_.pixels(); }
  FrameView frame(std::size_t i) const;
  std::span<const float> values() const noexcept { return values_; }

  /// Throws ShapeMismatch when the frame extent differs from the stack's.
  void push_back(const HeatmapFrame& f);

private:
  std::size_t frames_ = 0;
  Extent extent_{};
  std::vector<float> values_;
};

}  // namespace echobeat
