#pragma once

#include "echobeat/decode.hpp"
#include "echobeat/geometry.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace echobeat {

struct SeriesEntry {
  std::size_t frame_index = 0;
  std::optional<MeasurementTriple> value;  // nullopt marks an excluded frame (GAP)

  friend bool operator==(const SeriesEntry&, const SeriesEntry&) = default;
};

struct MeasurementSeries {
  std::vector<SeriesEntry> entries;
  double fps = 0.0;

  /// Throws InvalidConfig unless fps > 0 and frame indices strictly increase.
  void validate() const;
};

MeasurementSeries series_from_records(std::span<const FrameRecord> records, double fps);

struct BeatConfig {
  double max_heart_rate = 160.0;  // bpm
  double min_prominence_frac = 0.2;
  std::size_t smooth_median_window = 3;
  std::optional<std::size_t> smooth_mean_window;  // default round(fps / 10), at least 1
  bool smooth = true;

  void validate() const;
  std::size_t median_window() const;
  std::size_t mean_window(double fps) const;
  /// Minimum diastole-to-diastole distance in frames: fps * 60 / max_heart_rate.
  double min_separation(double fps) const;
};

struct BeatRecord {
  std::size_t beat_index = 0;
  std::size_t diastole_frame = 0;
  std::size_t systole_frame = 0;
  MeasurementTriple diastolic;
  MeasurementTriple systolic;

  friend bool operator==(const BeatRecord&, const BeatRecord&) = default;
};

/// Fills GAPs by linear interpolation in frame index (boundary GAPs copy the
/// nearest kept value). Throws AllGaps if nothing is kept.
MeasurementSeries fill_gaps(const MeasurementSeries& s);

/// fill_gaps, then a per-component running median and running mean with
/// edge replication. Frame indices are unchanged.
MeasurementSeries smooth_series(const MeasurementSeries& s, const BeatConfig& cfg);

/// Local maxima (plateaus resolve to their middle sample) that survive a
/// minimum-distance filter (higher peaks win) and a minimum topographic
/// prominence. Returns sample positions in ascending order.
std::vector<std::size_t> find_peaks(std::span<const double> x, double min_prominence,
                                    double min_distance);

/// Diastoles are LVID peaks of the (optionally smoothed) series; each beat's
/// systole is the LVID minimum before the next diastole (or before the end of
/// the series for the last one). Reported measurements are the unsmoothed
/// values at those frames. Throws NoBeatsDetected when no complete beat is found.
std::vector<BeatRecord> detect_beats(const MeasurementSeries& s, const BeatConfig& cfg);

}  // namespace echobeat
