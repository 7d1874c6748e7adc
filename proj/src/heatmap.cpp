#include "echobeat/heatmap.hpp"

#include "echobeat/error.hpp"

#include <string>

namespace echobeat {

namespace {

[[noreturn]] void shape_error(const std::string& what, std::size_t expected, std::size_t got) {
  throw Error(ErrorCode::ShapeMismatch, what,
              {{"expected", std::to_string(expected)}, {"got", std::to_string(got)}});
}

}  // namespace

FrameView::FrameView(std::span<const float> values, Extent extent)
    : values_(values), extent_(extent) {
  if (values.size() != kNumChannels * extent.pixels()) {
    shape_error("frame must hold 4 x H x W values", kNumChannels * extent.pixels(), values.size());
  }
}

HeatmapFrame::HeatmapFrame(Extent extent)
    : extent_(extent), values_(kNumChannels * extent.pixels(), 0.0f) {}

HeatmapFrame::HeatmapFrame(Extent extent, std::vector<float> values)
    : extent_(extent), values_(std::move(values)) {
  if (values_.size() != kNumChannels * extent.pixels()) {
    shape_error("frame must hold 4 x H x W values", kNumChannels * extent.pixels(), values_.size());
  }
}

HeatmapStack::HeatmapStack(std::size_t frames, Extent extent, std::vector<float> values)
    : frames_(frames), extent_(extent), values_(std::move(values)) {
  if (values_.size() != frames * frame_size()) {
    shape_error("stack must hold F x 4 x H x W values", frames * frame_size(), values_.size());
  }
}

FrameView HeatmapStack::frame(std::size_t i) const {
  if (i >= frames_) shape_error("frame index out of range", frames_, i);
  return FrameView(std::span<const float>(values_).subspan(i * frame_size(), frame_size()),
                   extent_);
}

void HeatmapStack::push_back(const HeatmapFrame& f) {
  if (f.extent() != extent_) shape_error("frame extent differs from stack", extent_.pixels(),
                                         f.extent().pixels());
  values_.insert(values_.end(), f.values().begin(), f.values().end());
  ++frames_;
}

}  // namespace echobeat
