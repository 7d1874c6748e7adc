#pragma once

#include "echobeat/geometry.hpp"
#include "echobeat/heatmap.hpp"

#include <cstdint>
#include <vector>

namespace echobeat {

/// Periodic PLAX-like ground truth. LVID follows a raised cosine between
/// lvid_s and lvid_d; the walls thicken linearly as the cavity shrinks.
struct PhantomConfig {
  double fps = 50.0;
  double duration_s = 5.0;
  std::vector<double> period_s{1.0};  // cycled for irregular rhythm
  double lvid_d = 4.8;                // cm
  double lvid_s = 3.2;                // cm
  double ivs_d = 1.0;                 // cm
  double lvpw_d = 0.9;                // cm
  double wall_gain = 0.3;             // cm of wall per cm of LVID reduction
  double axis_angle_deg = 20.0;
  Point2 origin{30.0, 40.0};  // IVS_TOP position, px
  double cm_per_pixel = 0.05;

  void validate() const;
  std::size_t frame_count() const;
};

struct Trajectory {
  Calibration calibration;
  std::vector<PointQuad> points;
  std::vector<MeasurementTriple> truth;
  std::vector<double> phase;  // cycles elapsed; integers are end-diastole
  std::vector<std::size_t> diastole_frames;
  std::vector<std::size_t> systole_frames;

  std::size_t frames() const noexcept { return points.size(); }
};

Trajectory generate_trajectory(const PhantomConfig& cfg);

/// Smallest extent holding every trajectory point with `margin` pixels to spare.
Extent covering_extent(const Trajectory& t, double margin);

/// Stand-in for the keypoint network: a Gaussian blob per channel at the
/// ground-truth point plus N(0, noise_sigma_px^2) jitter per axis.
struct MockModelConfig {
  double noise_sigma_px = 0.0;
  double blob_sigma_px = 1.5;
  double peak_value = 1.0;
  double dropout_prob = 0.0;  // per channel and frame
  std::uint64_t seed = 0;

  void validate() const;
};

/// One frame; identical to the corresponding frame of render_heatmaps.
HeatmapFrame render_frame(const Trajectory& t, std::size_t frame, const MockModelConfig& mock,
                          Extent extent);
HeatmapStack render_heatmaps(const Trajectory& t, const MockModelConfig& mock, Extent extent);

}  // namespace echobeat
