#pragma once

#include "echobeat/geometry.hpp"
#include "echobeat/heatmap.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace echobeat {

struct DecodeConfig {
  double confidence_threshold = 0.3;
  double max_angle_spread = 30.0;  // degrees
  bool weighted_centroid = true;

  void validate() const;
};

enum class QualityReason : std::uint8_t { EmptyChannel = 1, AngleInconsistent = 2 };

std::string_view to_string(QualityReason r);

struct FrameQuality {
  std::uint8_t reason_bits = 0;

  bool kept() const noexcept { return reason_bits == 0; }
  bool has(QualityReason r) const noexcept {
    return (reason_bits & static_cast<std::uint8_t>(r)) != 0;
  }
  void add(QualityReason r) noexcept { reason_bits |= static_cast<std::uint8_t>(r); }
  std::vector<QualityReason> reasons() const;

  friend bool operator==(const FrameQuality&, const FrameQuality&) = default;
};

struct DecodedFrame {
  KeypointSet keypoints;
  FrameQuality quality;
};

/// Thresholded centroid per channel. Pixels below the threshold are ignored;
/// confidence is the largest surviving activation. A channel with no survivors
/// is absent (EMPTY_CHANNEL). With all four present, a maximum pairwise segment
/// angle difference above max_angle_spread (or a zero-length segment) marks
/// the frame ANGLE_INCONSISTENT.
DecodedFrame decode_frame(FrameView frame, const DecodeConfig& cfg, std::size_t frame_index = 0);

struct FrameRecord {
  std::size_t frame_index = 0;
  KeypointSet keypoints;
  FrameQuality quality;
  std::optional<MeasurementTriple> measurement;  // present iff quality.kept()
};

/// Decodes every frame of the stack. `jobs` > 1 splits frames across threads;
/// output order and content do not depend on it.
std::vector<FrameRecord> decode_video(const HeatmapStack& stack, const DecodeConfig& cfg,
                                      const Calibration& cal, std::size_t first_frame_index = 0,
                                      unsigned jobs = 1);

FrameRecord make_record(const DecodedFrame& decoded, const Calibration& cal);

}  // namespace echobeat
