#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace echobeat {

/// Continuous pixel coordinate: x is the column, y the row. Pixel (c, r) has
/// its center at (c, r).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// The four PLAX measurement points, ordered along the measurement line from
/// the right-ventricular side of the septum to the back of the posterior wall.
enum class Channel : std::uint8_t { IvsTop = 0, LvSeptal = 1, LvPosterior = 2, PwBottom = 3 };

inline constexpr std::size_t kNumChannels = 4;
inline constexpr std::array<Channel, kNumChannels> kChannels{
    Channel::IvsTop, Channel::LvSeptal, Channel::LvPosterior, Channel::PwBottom};

constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }
std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view name);

/// Named points for the four channels, indexed by `index(Channel)`.
using PointQuad = std::array<Point2, kNumChannels>;

struct Keypoint {
  Point2 position;
  double confidence = 0.0;
  Channel channel = Channel::IvsTop;
};

/// Decoded keypoints of one frame. Slot i holds channel i, so channels are
/// unique by construction; an empty slot means no pixel survived thresholding.
struct KeypointSet {
  std::size_t frame_index = 0;
  std::array<std::optional<Keypoint>, kNumChannels> points;

  bool complete() const noexcept;
  /// Throws MissingKeypoint when the channel is absent.
  const Keypoint& at(Channel c) const;
  /// Throws MissingKeypoint unless complete().
  PointQuad positions() const;

  static KeypointSet from_points(const PointQuad& pts, std::size_t frame_index = 0,
                                 double confidence = 1.0);
};

struct Calibration {
  double cm_per_pixel = 0.0;
  double fps = 0.0;

  /// Validating constructor; throws InvalidConfig unless both are finite and > 0.
  static Calibration make(double cm_per_pixel, double fps);
};

/// IVS / LVID / LVPW lengths in centimetres.
struct MeasurementTriple {
  double ivs = 0.0;
  double lvid = 0.0;
  double lvpw = 0.0;

  friend bool operator==(const MeasurementTriple&, const MeasurementTriple&) = default;
};

MeasurementTriple measure(const PointQuad& pts, const Calibration& cal);
MeasurementTriple measure(const KeypointSet& ks, const Calibration& cal);

/// atan2 angle in degrees, (-180, 180], of each ordered segment
/// (IVS_TOP->LV_SEPTAL, LV_SEPTAL->LV_POSTERIOR, LV_POSTERIOR->PW_BOTTOM).
/// Throws DegenerateSegment for a zero-length segment.
std::array<double, 3> segment_angles(const PointQuad& pts);
std::array<double, 3> segment_angles(const KeypointSet& ks);

/// Circular difference folded into [0, 180].
double angle_difference(double a_deg, double b_deg);
/// Largest pairwise circular difference among the three segment angles.
double max_angle_spread(const std::array<double, 3>& angles_deg);

}  // namespace echobeat
