#include "echobeat/study.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace echobeat {

namespace {

template <typename F>
std::vector<double> collect(std::span<const BeatRecord> beats, F f) {
  std::vector<double> out;
  out.reserve(beats.size());
  for (const auto& b : beats) out.push_back(f(b));
  return out;
}

std::vector<double> ivsd_of(std::span<const BeatRecord> b) {
  return collect(b, [](const BeatRecord& r) { return r.diastolic.ivs; });
}
std::vector<double> lvidd_of(std::span<const BeatRecord> b) {
  return collect(b, [](const BeatRecord& r) { return r.diastolic.lvid; });
}
std::vector<double> lvpwd_of(std::span<const BeatRecord> b) {
  return collect(b, [](const BeatRecord& r) { return r.diastolic.lvpw; });
}
std::vector<double> lvids_of(std::span<const BeatRecord> b) {
  return collect(b, [](const BeatRecord& r) { return r.systolic.lvid; });
}

}  // namespace

void LvhRule::validate() const {
  if (!(ivs_threshold_cm > 0.0 && std::isfinite(ivs_threshold_cm)) ||
      !(lvpw_threshold_cm > 0.0 && std::isfinite(lvpw_threshold_cm))) {
    throw Error(ErrorCode::InvalidConfig, "LVH thresholds must be finite and > 0",
                {{"ivs_threshold_cm", std::to_string(ivs_threshold_cm)},
                 {"lvpw_threshold_cm", std::to_string(lvpw_threshold_cm)}});
  }
}

MeasureStats describe(std::span<const double> values) {
  MeasureStats s;
  const auto n = values.size();
  if (n == 0) return s;
  // Sorting first makes the sums independent of input order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = std::clamp(sum / static_cast<double>(n), sorted.front(), sorted.back());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

StudySummary summarize(std::span<const BeatRecord> beats, const std::optional<LvhRule>& rule,
                       Aggregation aggregation) {
  if (beats.empty()) throw Error(ErrorCode::EmptyBeats, "cannot summarize an empty beat list");
  StudySummary out;
  out.n_beats = beats.size();
  out.per_beat.assign(beats.begin(), beats.end());
  out.aggregation = aggregation;
  out.ivsd = describe(ivsd_of(beats));
  out.lvidd = describe(lvidd_of(beats));
  out.lvpwd = describe(lvpwd_of(beats));
  out.lvids = describe(lvids_of(beats));
  if (rule) {
    rule->validate();
    const bool ivs_hit = out.value(out.ivsd) >= rule->ivs_threshold_cm;
    const bool lvpw_hit = out.value(out.lvpwd) >= rule->lvpw_threshold_cm;
    out.lvh_flag = rule->combinator == Combinator::Any ? (ivs_hit || lvpw_hit) : (ivs_hit && lvpw_hit);
  }
  return out;
}

BeatSpread beat_spread(std::span<const BeatRecord> beats) {
  if (beats.size() < 2) {
    throw Error(ErrorCode::InsufficientBeats, "beat spread needs at least two beats",
                {{"n_beats", std::to_string(beats.size())}});
  }
  auto spread = [](const std::vector<double>& v) {
    const MeasureStats s = describe(v);
    return Spread{s.max - s.min, s.sd.value_or(0.0)};
  };
  return BeatSpread{spread(ivsd_of(beats)), spread(lvidd_of(beats)), spread(lvpwd_of(beats)),
                    spread(lvids_of(beats))};
}

}  // namespace echobeat
