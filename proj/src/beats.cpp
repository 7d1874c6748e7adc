#include "echobeat/beats.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace echobeat {

namespace {

using Component = double MeasurementTriple::*;
constexpr Component kComponents[] = {&MeasurementTriple::ivs, &MeasurementTriple::lvid,
                                     &MeasurementTriple::lvpw};

std::size_t make_odd(std::size_t w) { return w % 2 == 0 ? w + 1 : w; }

std::vector<double> running_median(std::span<const double> x, std::size_t window) {
  const std::size_t half = window / 2;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  std::vector<double> buf(window);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < window; ++k) {
      const auto j = std::clamp<std::ptrdiff_t>(i - static_cast<std::ptrdiff_t>(half) +
                                                    static_cast<std::ptrdiff_t>(k),
                                                0, n - 1);
      buf[k] = x[static_cast<std::size_t>(j)];
    }
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(half), buf.end());
    out[static_cast<std::size_t>(i)] = buf[half];
  }
  return out;
}

std::vector<double> running_mean(std::span<const double> x, std::size_t window) {
  const std::size_t half = window / 2;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      const auto j = std::clamp<std::ptrdiff_t>(i - static_cast<std::ptrdiff_t>(half) +
                                                    static_cast<std::ptrdiff_t>(k),
                                                0, n - 1);
      sum += x[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(window);
  }
  return out;
}

std::vector<double> component(const MeasurementSeries& filled, Component c) {
  std::vector<double> out;
  out.reserve(filled.entries.size());
  for (const auto& e : filled.entries) out.push_back((*e.value).*c);
  return out;
}

// Raw value at a position, falling back to the nearest kept entry (earlier wins ties).
const MeasurementTriple& nearest_kept(const MeasurementSeries& s, std::size_t pos) {
  if (s.entries[pos].value) return *s.entries[pos].value;
  const auto target = static_cast<double>(s.entries[pos].frame_index);
  const MeasurementTriple* best = nullptr;
  double best_dist = 0.0;
  for (const auto& e : s.entries) {
    if (!e.value) continue;
    const double d = std::abs(static_cast<double>(e.frame_index) - target);
    if (best == nullptr || d < best_dist) {
      best = &*e.value;
      best_dist = d;
    }
  }
  return *best;  // s has at least one kept entry once fill_gaps succeeded
}

}  // namespace

void MeasurementSeries::validate() const {
  if (!(std::isfinite(fps) && fps > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "series fps must be finite and > 0",
                {{"fps", std::to_string(fps)}});
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].frame_index <= entries[i - 1].frame_index) {
      throw Error(ErrorCode::InvalidConfig, "frame indices must strictly increase",
                  {{"position", std::to_string(i)},
                   {"frame_index", std::to_string(entries[i].frame_index)}});
    }
  }
}

MeasurementSeries series_from_records(std::span<const FrameRecord> records, double fps) {
  MeasurementSeries s;
  s.fps = fps;
  s.entries.reserve(records.size());
  for (const auto& r : records) s.entries.push_back({r.frame_index, r.measurement});
  s.validate();
  return s;
}

void BeatConfig::validate() const {
  auto bad = [](const char* what, double v) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be positive",
                {{what, std::to_string(v)}});
  };
  if (!(max_heart_rate > 0.0 && std::isfinite(max_heart_rate))) bad("max_heart_rate", max_heart_rate);
  if (!(min_prominence_frac > 0.0 && min_prominence_frac <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "min_prominence_frac must lie in (0, 1]",
                {{"min_prominence_frac", std::to_string(min_prominence_frac)}});
  }
  if (smooth_median_window == 0) bad("smooth_median_window", 0.0);
  if (smooth_mean_window && *smooth_mean_window == 0) bad("smooth_mean_window", 0.0);
}

std::size_t BeatConfig::median_window() const { return make_odd(smooth_median_window); }

std::size_t BeatConfig::mean_window(double fps) const {
  if (smooth_mean_window) return make_odd(*smooth_mean_window);
  return make_odd(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fps / 10.0))));
}

double BeatConfig::min_separation(double fps) const { return fps * 60.0 / max_heart_rate; }

MeasurementSeries fill_gaps(const MeasurementSeries& s) {
  s.validate();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    if (s.entries[i].value) kept.push_back(i);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::AllGaps, "series has no kept frames",
                {{"entries", std::to_string(s.entries.size())}});
  }

  MeasurementSeries out = s;
  std::size_t next = 0;  // first kept position >= i
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    while (next < kept.size() && kept[next] < i) ++next;
    if (out.entries[i].value) continue;
    if (next == 0) {
      out.entries[i].value = s.entries[kept.front()].value;
    } else if (next == kept.size()) {
      out.entries[i].value = s.entries[kept.back()].value;
    } else {
      const auto& lo = s.entries[kept[next - 1]];
      const auto& hi = s.entries[kept[next]];
      const double t = static_cast<double>(out.entries[i].frame_index - lo.frame_index) /
                       static_cast<double>(hi.frame_index - lo.frame_index);
      MeasurementTriple m;
      for (Component c : kComponents) m.*c = (*lo.value).*c + t * ((*hi.value).*c - (*lo.value).*c);
      out.entries[i].value = m;
    }
  }
  return out;
}

MeasurementSeries smooth_series(const MeasurementSeries& s, const BeatConfig& cfg) {
  cfg.validate();
  if (s.entries.empty()) throw Error(ErrorCode::AllGaps, "series is empty");
  MeasurementSeries out = fill_gaps(s);
  const std::size_t median_w = cfg.median_window();
  const std::size_t mean_w = cfg.mean_window(s.fps);
  for (Component c : kComponents) {
    const auto smoothed = running_mean(running_median(component(out, c), median_w), mean_w);
    for (std::size_t i = 0; i < out.entries.size(); ++i) (*out.entries[i].value).*c = smoothed[i];
  }
  return out;
}

std::vector<std::size_t> find_peaks(std::span<const double> x, double min_prominence,
                                    double min_distance) {
  const std::size_t n = x.size();
  std::vector<std::size_t> peaks;
  if (n < 3) return peaks;

  for (std::size_t i = 1; i + 1 < n;) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }

  if (min_distance > 1.0 && peaks.size() > 1) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t k : order) {
      if (!keep[k]) continue;
      for (std::size_t j = 0; j < peaks.size(); ++j) {
        if (j == k || !keep[j]) continue;
        const auto gap = static_cast<double>(peaks[j] > peaks[k] ? peaks[j] - peaks[k]
                                                                 : peaks[k] - peaks[j]);
        if (gap < min_distance) keep[j] = false;
      }
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < peaks.size(); ++j) {
      if (keep[j]) kept.push_back(peaks[j]);
    }
    peaks = std::move(kept);
  }

  std::vector<std::size_t> out;
  for (std::size_t p : peaks) {
    double left_min = x[p];
    for (std::size_t j = p; j-- > 0 && x[j] <= x[p];) left_min = std::min(left_min, x[j]);
    double right_min = x[p];
    for (std::size_t j = p + 1; j < n && x[j] <= x[p]; ++j) right_min = std::min(right_min, x[j]);
    if (x[p] - std::max(left_min, right_min) >= min_prominence) out.push_back(p);
  }
  return out;
}

std::vector<BeatRecord> detect_beats(const MeasurementSeries& s, const BeatConfig& cfg) {
  cfg.validate();
  if (s.entries.empty()) throw Error(ErrorCode::AllGaps, "series is empty");
  const MeasurementSeries located = cfg.smooth ? smooth_series(s, cfg) : fill_gaps(s);
  const std::vector<double> lvid = component(located, &MeasurementTriple::lvid);
  const std::size_t n = lvid.size();

  const auto [lo, hi] = std::minmax_element(lvid.begin(), lvid.end());
  const double range = *hi - *lo;
  std::vector<std::size_t> diastoles;
  if (range > 0.0) {
    diastoles = find_peaks(lvid, cfg.min_prominence_frac * range, cfg.min_separation(s.fps));
  }

  std::vector<BeatRecord> beats;
  for (std::size_t k = 0; k < diastoles.size(); ++k) {
    const std::size_t d = diastoles[k];
    if (d == 0 || d + 1 >= n) continue;
    const std::size_t stop = k + 1 < diastoles.size() ? diastoles[k + 1] : n;
    const auto it = std::min_element(lvid.begin() + static_cast<std::ptrdiff_t>(d) + 1,
                                     lvid.begin() + static_cast<std::ptrdiff_t>(stop));
    const auto sys = static_cast<std::size_t>(it - lvid.begin());
    // The trailing beat needs a trough that the series actually climbs out of.
    if (stop == n && sys + 1 >= n) continue;
    if (!(lvid[sys] < lvid[d])) continue;

    BeatRecord b;
    b.diastole_frame = s.entries[d].frame_index;
    b.systole_frame = s.entries[sys].frame_index;
    b.diastolic = nearest_kept(s, d);
    b.systolic = nearest_kept(s, sys);
    if (b.diastolic.lvid < b.systolic.lvid) continue;
    b.beat_index = beats.size();
    beats.push_back(b);
  }

  if (beats.empty()) {
    throw Error(ErrorCode::NoBeatsDetected, "no complete cardiac cycle detected",
                {{"frames", std::to_string(n)}, {"diastole_candidates", std::to_string(diastoles.size())}});
  }
  return beats;
}

}  // namespace echobeat
