#pragma once

#include "echobeat/beats.hpp"

#include <optional>
#include <span>
#include <vector>

namespace echobeat {

enum class Combinator { Any, All };
enum class Aggregation { Mean, Median };

struct LvhRule {
  double ivs_threshold_cm = 0.0;
  double lvpw_threshold_cm = 0.0;
  Combinator combinator = Combinator::Any;

  void validate() const;
};

struct MeasureStats {
  double mean = 0.0;
  double median = 0.0;
  std::optional<double> sd;  // sample sd; absent for a single beat
  double min = 0.0;
  double max = 0.0;
};

struct StudySummary {
  std::size_t n_beats = 0;
  std::vector<BeatRecord> per_beat;
  MeasureStats ivsd, lvidd, lvpwd, lvids;
  std::optional<bool> lvh_flag;
  Aggregation aggregation = Aggregation::Mean;

  /// Study-level value for a measurement under the configured aggregation.
  double value(const MeasureStats& m) const {
    return aggregation == Aggregation::Mean ? m.mean : m.median;
  }
};

MeasureStats describe(std::span<const double> values);

/// Throws EmptyBeats for an empty beat list. The LVH flag, when a rule is
/// given, tests the study values (mean by default) of IVSd and LVPWd.
StudySummary summarize(std::span<const BeatRecord> beats, const std::optional<LvhRule>& rule,
                       Aggregation aggregation = Aggregation::Mean);

struct Spread {
  double range = 0.0;
  double sd = 0.0;
};

struct BeatSpread {
  Spread ivsd, lvidd, lvpwd, lvids;
};

/// Throws InsufficientBeats for fewer than two beats.
BeatSpread beat_spread(std::span<const BeatRecord> beats);

}  // namespace echobeat
