#include "echobeat/geometry.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace echobeat {

namespace {

constexpr std::array<std::string_view, kNumChannels> kChannelNames{
    "ivs_top", "lv_septal", "lv_posterior", "pw_bottom"};

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view channel_name(Channel c) { return kChannelNames[index(c)]; }

std::optional<Channel> parse_channel(std::string_view name) {
  for (Channel c : kChannels) {
    if (kChannelNames[index(c)] == name) return c;
  }
  return std::nullopt;
}

bool KeypointSet::complete() const noexcept {
  return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.has_value(); });
}

const Keypoint& KeypointSet::at(Channel c) const {
  const auto& slot = points[index(c)];
  if (!slot) {
    throw Error(ErrorCode::MissingKeypoint, "keypoint channel is absent",
                {{"channel", std::string(channel_name(c))},
                 {"frame_index", std::to_string(frame_index)}});
  }
  return *slot;
}

PointQuad KeypointSet::positions() const {
  PointQuad out;
  for (Channel c : kChannels) out[index(c)] = at(c).position;
  return out;
}

KeypointSet KeypointSet::from_points(const PointQuad& pts, std::size_t frame_index,
                                     double confidence) {
  KeypointSet ks;
  ks.frame_index = frame_index;
  for (Channel c : kChannels) ks.points[index(c)] = Keypoint{pts[index(c)], confidence, c};
  return ks;
}

Calibration Calibration::make(double cm_per_pixel, double fps) {
  if (!(std::isfinite(cm_per_pixel) && cm_per_pixel > 0.0) ||
      !(std::isfinite(fps) && fps > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "calibration requires finite cm_per_pixel > 0 and fps > 0",
                {{"cm_per_pixel", std::to_string(cm_per_pixel)}, {"fps", std::to_string(fps)}});
  }
  return Calibration{cm_per_pixel, fps};
}

MeasurementTriple measure(const PointQuad& pts, const Calibration& cal) {
  const auto& p = pts;
  return MeasurementTriple{
      distance(p[index(Channel::IvsTop)], p[index(Channel::LvSeptal)]) * cal.cm_per_pixel,
      distance(p[index(Channel::LvSeptal)], p[index(Channel::LvPosterior)]) * cal.cm_per_pixel,
      distance(p[index(Channel::LvPosterior)], p[index(Channel::PwBottom)]) * cal.cm_per_pixel,
  };
}

MeasurementTriple measure(const KeypointSet& ks, const Calibration& cal) {
  return measure(ks.positions(), cal);
}

std::array<double, 3> segment_angles(const PointQuad& pts) {
  std::array<double, 3> out{};
  for (std::size_t s = 0; s < 3; ++s) {
    const double dx = pts[s + 1].x - pts[s].x;
    const double dy = pts[s + 1].y - pts[s].y;
    if (dx == 0.0 && dy == 0.0) {
      throw Error(ErrorCode::DegenerateSegment, "segment has zero length",
                  {{"segment", std::to_string(s)}});
    }
    double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    if (deg <= -180.0) deg += 360.0;
    out[s] = deg;
  }
  return out;
}

std::array<double, 3> segment_angles(const KeypointSet& ks) { return segment_angles(ks.positions()); }

double angle_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

double max_angle_spread(const std::array<double, 3>& a) {
  return std::max({angle_difference(a[0], a[1]), angle_difference(a[0], a[2]),
                   angle_difference(a[1], a[2])});
}

}  // namespace echobeat
