#include "echobeat/phantom.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace echobeat {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PhantomConfig::validate() const {
  require(positive(fps), "phantom fps must be > 0");
  require(positive(duration_s), "phantom duration_s must be > 0");
  require(!period_s.empty(), "phantom needs at least one period");
  for (double p : period_s) require(positive(p), "phantom periods must be > 0");
  require(positive(lvid_s) && std::isfinite(lvid_d) && lvid_d > lvid_s,
          "phantom requires lvid_d > lvid_s > 0");
  require(positive(ivs_d) && positive(lvpw_d), "phantom wall thicknesses must be > 0");
  require(std::isfinite(wall_gain) && wall_gain >= 0.0, "phantom wall_gain must be >= 0");
  require(std::isfinite(axis_angle_deg), "phantom axis_angle must be finite");
  require(std::isfinite(origin.x) && std::isfinite(origin.y), "phantom origin must be finite");
  require(positive(cm_per_pixel), "phantom cm_per_pixel must be > 0");
  require(frame_count() >= 1, "phantom must span at least one frame");
}

std::size_t PhantomConfig::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * fps));
}

Trajectory generate_trajectory(const PhantomConfig& cfg) {
  cfg.validate();
  Trajectory t;
  t.calibration = Calibration::make(cfg.cm_per_pixel, cfg.fps);
  const std::size_t n = cfg.frame_count();
  const double angle = cfg.axis_angle_deg * std::numbers::pi / 180.0;
  const Point2 dir{std::cos(angle), std::sin(angle)};

  // Beat boundaries up to the end of the clip.
  std::vector<double> starts{0.0};
  const double end_time = static_cast<double>(n) / cfg.fps;
  while (starts.back() <= end_time) {
    const std::size_t k = starts.size() - 1;
    starts.push_back(starts.back() + cfg.period_s[k % cfg.period_s.size()]);
  }

  auto frame_of = [&](double time) { return static_cast<std::size_t>(std::llround(time * cfg.fps)); };
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const double period = starts[k + 1] - starts[k];
    const std::size_t d = frame_of(starts[k]);
    const std::size_t s = frame_of(starts[k] + period / 2.0);
    if (d < n) t.diastole_frames.push_back(d);
    if (s < n) t.systole_frames.push_back(s);
  }

  std::size_t beat = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double time = static_cast<double>(i) / cfg.fps;
    while (time >= starts[beat + 1]) ++beat;
    const double frac = (time - starts[beat]) / (starts[beat + 1] - starts[beat]);
    const double phase = static_cast<double>(beat) + frac;

    MeasurementTriple m;
    m.lvid = cfg.lvid_s + (cfg.lvid_d - cfg.lvid_s) * (1.0 + std::cos(2.0 * std::numbers::pi * frac)) / 2.0;
    m.ivs = cfg.ivs_d + cfg.wall_gain * (cfg.lvid_d - m.lvid);
    m.lvpw = cfg.lvpw_d + cfg.wall_gain * (cfg.lvid_d - m.lvid);

    PointQuad q;
    double along = 0.0;
    const double lengths[3] = {m.ivs, m.lvid, m.lvpw};
    q[0] = cfg.origin;
    for (std::size_t s = 0; s < 3; ++s) {
      along += lengths[s] / cfg.cm_per_pixel;
      q[s + 1] = Point2{cfg.origin.x + along * dir.x, cfg.origin.y + along * dir.y};
    }
    t.points.push_back(q);
    t.truth.push_back(m);
    t.phase.push_back(phase);
  }
  return t;
}

Extent covering_extent(const Trajectory& t, double margin) {
  double max_x = 0.0, max_y = 0.0;
  for (const auto& q : t.points) {
    for (const auto& p : q) {
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  return Extent{static_cast<std::size_t>(std::ceil(max_y + margin)) + 1,
                static_cast<std::size_t>(std::ceil(max_x + margin)) + 1};
}

void MockModelConfig::validate() const {
  require(std::isfinite(noise_sigma_px) && noise_sigma_px >= 0.0, "mock noise_sigma_px must be >= 0");
  require(positive(blob_sigma_px), "mock blob_sigma_px must be > 0");
  require(peak_value > 0.0 && peak_value <= 1.0, "mock peak_value must lie in (0, 1]");
  require(dropout_prob >= 0.0 && dropout_prob <= 1.0,
          "mock dropout_prob must lie in [0, 1]");
}

HeatmapFrame render_frame(const Trajectory& t, std::size_t frame, const MockModelConfig& mock,
                          Extent extent) {
  mock.validate();
  if (extent.height == 0 || extent.width == 0) {
    throw Error(ErrorCode::InvalidExtent, "render extent must be positive");
  }
  if (frame >= t.frames()) {
    throw Error(ErrorCode::InvalidConfig, "frame index beyond trajectory",
                {{"frame", std::to_string(frame)}, {"frames", std::to_string(t.frames())}});
  }
  const double max_x = static_cast<double>(extent.width - 1);
  const double max_y = static_cast<double>(extent.height - 1);

  HeatmapFrame out(extent);
  const double radius = mock.blob_sigma_px * std::sqrt(2.0 * std::log(1e6));
  const double inv_two_var = 1.0 / (2.0 * mock.blob_sigma_px * mock.blob_sigma_px);
  for (Channel c : kChannels) {
    const Point2 truth = t.points[frame][index(c)];
    if (!(truth.x >= 0.0 && truth.x <= max_x && truth.y >= 0.0 && truth.y <= max_y)) {
      throw Error(ErrorCode::InvalidExtent, "ground-truth point lies outside the render extent",
                  {{"frame", std::to_string(frame)}, {"channel", std::string(channel_name(c))}});
    }
    std::mt19937_64 rng(derive_seed(mock.seed, frame * kNumChannels + index(c)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    const bool dropped = unit(rng) < mock.dropout_prob;
    Point2 center = truth;
    if (mock.noise_sigma_px > 0.0) {
      center.x = std::clamp(center.x + mock.noise_sigma_px * noise(rng), 0.0, max_x);
      center.y = std::clamp(center.y + mock.noise_sigma_px * noise(rng), 0.0, max_y);
    }
    if (dropped) continue;

    const auto col0 = static_cast<std::size_t>(std::max(0.0, std::floor(center.x - radius)));
    const auto col1 = static_cast<std::size_t>(std::min(max_x, std::ceil(center.x + radius)));
    const auto row0 = static_cast<std::size_t>(std::max(0.0, std::floor(center.y - radius)));
    const auto row1 = static_cast<std::size_t>(std::min(max_y, std::ceil(center.y + radius)));
    for (std::size_t row = row0; row <= row1; ++row) {
      const double dy = static_cast<double>(row) - center.y;
      for (std::size_t col = col0; col <= col1; ++col) {
        const double dx = static_cast<double>(col) - center.x;
        out.at(c, row, col) =
            static_cast<float>(mock.peak_value * std::exp(-(dx * dx + dy * dy) * inv_two_var));
      }
    }
  }
  return out;
}

HeatmapStack render_heatmaps(const Trajectory& t, const MockModelConfig& mock, Extent extent) {
  HeatmapStack stack(extent);
  for (std::size_t i = 0; i < t.frames(); ++i) stack.push_back(render_frame(t, i, mock, extent));
  return stack;
}

}  // namespace echobeat
