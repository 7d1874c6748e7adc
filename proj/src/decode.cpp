#include "echobeat/decode.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace echobeat {

void DecodeConfig::validate() const {
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidence_threshold must lie in [0, 1]",
                {{"confidence_threshold", std::to_string(confidence_threshold)}});
  }
  if (!(max_angle_spread > 0.0 && max_angle_spread <= 180.0)) {
    throw Error(ErrorCode::InvalidConfig, "max_angle_spread must lie in (0, 180]",
                {{"max_angle_spread", std::to_string(max_angle_spread)}});
  }
}

std::string_view to_string(QualityReason r) {
  switch (r) {
    case QualityReason::EmptyChannel: return "EMPTY_CHANNEL";
    case QualityReason::AngleInconsistent: return "ANGLE_INCONSISTENT";
  }
  return "UNKNOWN";
}

std::vector<QualityReason> FrameQuality::reasons() const {
  std::vector<QualityReason> out;
  for (QualityReason r : {QualityReason::EmptyChannel, QualityReason::AngleInconsistent}) {
    if (has(r)) out.push_back(r);
  }
  return out;
}

namespace {

std::optional<Keypoint> decode_channel(std::span<const float> ch, Extent extent, Channel c,
                                       const DecodeConfig& cfg) {
  const auto threshold = static_cast<float>(cfg.confidence_threshold);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  double cx = 0.0, cy = 0.0;
  std::size_t count = 0;
  float peak = 0.0f;
  for (std::size_t row = 0; row < extent.height; ++row) {
    const float* line = ch.data() + row * extent.width;
    double row_w = 0.0, row_wx = 0.0;
    std::size_t row_n = 0, row_x = 0;
    for (std::size_t col = 0; col < extent.width; ++col) {
      const float a = line[col];
      if (a < threshold || !(a == a)) continue;
      row_w += a;
      row_wx += static_cast<double>(a) * static_cast<double>(col);
      row_x += col;
      ++row_n;
      peak = std::max(peak, a);
    }
    if (row_n == 0) continue;
    sw += row_w;
    sx += row_wx;
    sy += row_w * static_cast<double>(row);
    cx += static_cast<double>(row_x);
    cy += static_cast<double>(row_n) * static_cast<double>(row);
    count += row_n;
  }
  if (count == 0) return std::nullopt;

  Point2 pos;
  if (cfg.weighted_centroid && sw > 0.0) {
    pos = Point2{sx / sw, sy / sw};
  } else {
    // Uniform weights (or all-zero survivors at threshold 0).
    pos = Point2{cx / static_cast<double>(count), cy / static_cast<double>(count)};
  }
  return Keypoint{pos, static_cast<double>(peak), c};
}

}  // namespace

DecodedFrame decode_frame(FrameView frame, const DecodeConfig& cfg, std::size_t frame_index) {
  DecodedFrame out;
  out.keypoints.frame_index = frame_index;
  for (Channel c : kChannels) {
    out.keypoints.points[index(c)] = decode_channel(frame.channel(c), frame.extent(), c, cfg);
    if (!out.keypoints.points[index(c)]) out.quality.add(QualityReason::EmptyChannel);
  }
  if (out.keypoints.complete()) {
    try {
      if (max_angle_spread(segment_angles(out.keypoints)) > cfg.max_angle_spread) {
        out.quality.add(QualityReason::AngleInconsistent);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSegment) throw;
      out.quality.add(QualityReason::AngleInconsistent);
    }
  }
  return out;
}

FrameRecord make_record(const DecodedFrame& decoded, const Calibration& cal) {
  FrameRecord rec{decoded.keypoints.frame_index, decoded.keypoints, decoded.quality, std::nullopt};
  if (decoded.quality.kept()) rec.measurement = measure(decoded.keypoints, cal);
  return rec;
}

std::vector<FrameRecord> decode_video(const HeatmapStack& stack, const DecodeConfig& cfg,
                                      const Calibration& cal, std::size_t first_frame_index,
                                      unsigned jobs) {
  cfg.validate();
  std::vector<FrameRecord> records(stack.frames());
  std::vector<std::exception_ptr> failures;
  std::mutex failures_mutex;
  auto work = [&](std::size_t begin, std::size_t end) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        records[i] = make_record(decode_frame(stack.frame(i), cfg, first_frame_index + i), cal);
      }
    } catch (...) {
      std::lock_guard lock(failures_mutex);
      failures.push_back(std::current_exception());
    }
  };

  const std::size_t n = stack.frames();
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  if (!failures.empty()) std::rethrow_exception(failures.front());
  return records;
}

}  // namespace echobeat
