// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "echobeat/beats.hpp"
#include "echobeat/decode.hpp"
#include "echobeat/labels.hpp"
#include "echobeat/phantom.hpp"
#include "echobeat/stats.hpp"
#include "echobeat/study.hpp"

#include <oracles.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace echobeat;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  std::vector<double> pred;
  std::vector<double> label;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution hot(0.05);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    in.pred.push_back(u(rng));
    in.label.push_back(hot(rng) ? 1.0 : (u(rng) < 0.2 ? u(rng) : 0.0));
  }
  return in;
}

Outcome loss_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> side(4, 48);
  double worst = 0.0, worst_linear = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto in = random_instance(rng, 4 * side(rng) * side(rng));
    const double alpha = i == 0 ? 0.001 : ua(rng);
    const std::span<const double> p(in.pred), y(in.label);
    const double got = weighted_mse(p, y, alpha);
    worst = std::max(worst, oracle::relative_error(got, oracle::weighted_mse(in.label, in.pred, alpha)));
    const double mixed = alpha * weighted_mse(p, y, 1.0) + (1.0 - alpha) * weighted_mse(p, y, 0.0);
    worst_linear = std::max(worst_linear, oracle::relative_error(got, mixed));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && worst_linear <= 1e-12 && secs < 5.0,
          fmt("max rel err vs oracle %.2e, alpha-linearity %.2e, %.2f s", worst, worst_linear, secs)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto in = random_instance(rng, 4 * 8 * 8);
    const double alpha = i % 2 == 0 ? 0.001 : ua(rng);
    const auto analytic = weighted_mse_grad(std::span<const double>(in.pred), std::span<const double>(in.label), alpha);
    const auto numeric = oracle::central_difference(
        [&](const std::vector<double>& x) { return oracle::weighted_mse_extended(in.label, x, alpha); }, in.pred, 1e-4);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      worst = std::max(worst, oracle::relative_error(analytic[k], numeric[k]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 10.0, fmt("max rel err %.2e over 50 instances, %.2f s", worst, secs)};
}

Outcome rasterize_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  const Extent extent{64, 96};
  std::uniform_real_distribution<double> ux(0.0, 95.0), uy(0.0, 63.0);
  const DecodeConfig cfg;
  double worst = 0.0;
  std::size_t points = 0;
  for (int i = 0; i < 250; ++i) {
    PointQuad q{};
    for (auto& p : q) p = Point2{ux(rng), uy(rng)};
    const LabelImage label = rasterize(q, extent, JitterConfig{0.0, 0});
    const auto d = decode_frame(label.view(), cfg, 0);
    for (Channel c : kChannels) {
      const auto& k = d.keypoints.points[index(c)];
      if (!k) {
        worst = INFINITY;
        continue;
      }
      worst = std::max(worst, distance(k->position, q[index(c)]));
      ++points;
    }
  }
  const double secs = seconds_since(t0);
  const double bound = 0.5 * std::sqrt(2.0);
  return {points == 1000 && worst <= bound && secs < 5.0,
          fmt("%zu points, max error %.4f px (bound %.4f), %.2f s", points, worst, bound, secs)};
}

struct StudyResult {
  std::vector<BeatRecord> beats;
  StudySummary summary;
};

StudyResult run_study(const PhantomConfig& phantom, const MockModelConfig& mock) {
  const Trajectory t = generate_trajectory(phantom);
  const double margin = std::ceil(4.0 * mock.blob_sigma_px + 4.0 * mock.noise_sigma_px) + 2.0;
  const Extent extent = covering_extent(t, margin);
  const DecodeConfig cfg;
  std::vector<FrameRecord> records;
  records.reserve(t.frames());
  for (std::size_t i = 0; i < t.frames(); ++i) {
    const HeatmapFrame frame = render_frame(t, i, mock, extent);
    records.push_back(make_record(decode_frame(frame.view(), cfg, i), t.calibration));
  }
  StudyResult r;
  r.beats = detect_beats(series_from_records(records, phantom.fps), BeatConfig{});
  r.summary = summarize(r.beats, std::nullopt);
  return r;
}

Outcome end_to_end() {
  PhantomConfig phantom;  // period 1 s, 50 fps, 5 s
  const Trajectory truth = generate_trajectory(phantom);
  const StudyResult r = run_study(phantom, MockModelConfig{});
  const double bound = std::sqrt(2.0) * phantom.cm_per_pixel;
  const double err = std::abs(r.summary.lvidd.mean - phantom.lvid_d);
  long worst_offset = 0;
  for (const auto& b : r.beats) {
    long best = 1L << 30;
    for (std::size_t d : truth.diastole_frames) {
      best = std::min(best, std::labs(static_cast<long>(b.diastole_frame) - static_cast<long>(d)));
    }
    worst_offset = std::max(worst_offset, best);
  }
  const std::size_t n = r.beats.size();
  return {err <= bound && worst_offset <= 1 && n >= 4 && n <= 5,
          fmt("lvidd.mean %.4f cm (|err| %.4f <= %.4f), %zu beats, worst diastole offset %ld frames",
              r.summary.lvidd.mean, err, bound, n, worst_offset)};
}

Outcome noise_monotonicity() {
  const auto t0 = Clock::now();
  const std::vector<double> sigmas{0.0, 0.5, 1.0, 2.0, 4.0};
  constexpr int kSeeds = 20;
  PhantomConfig phantom;
  std::vector<double> mae;
  std::size_t failures = 0;
  for (double s : sigmas) {
    double total = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      MockModelConfig mock;
      mock.noise_sigma_px = s;
      mock.seed = static_cast<std::uint64_t>(seed);
      try {
        total += std::abs(run_study(phantom, mock).summary.lvidd.mean - phantom.lvid_d);
      } catch (const std::exception&) {
        ++failures;
      }
    }
    mae.push_back(total / kSeeds);
  }
  bool monotone = failures == 0;
  for (std::size_t i = 1; i < mae.size(); ++i) monotone = monotone && mae[i] >= mae[i - 1];
  const double secs = seconds_since(t0);
  std::string curve;
  for (std::size_t i = 0; i < mae.size(); ++i) curve += fmt("%s%.4f", i ? ", " : "", mae[i]);
  return {monotone && secs < 60.0,
          fmt("LVIDd MAE [%s] cm at sigma {0,0.5,1,2,4} px, %zu failed studies, %.1f s", curve.c_str(), failures, secs)};
}

HeatmapFrame point_frame(const PointQuad& q, Extent e, float peak = 1.0f) {
  HeatmapFrame f(e);
  for (Channel c : kChannels) {
    const auto& p = q[index(c)];
    f.at(c, static_cast<std::size_t>(p.y), static_cast<std::size_t>(p.x)) = peak;
  }
  return f;
}

Outcome heuristic_fidelity() {
  const Extent e{64, 96};
  const DecodeConfig cfg;
  const PointQuad straight{Point2{10, 30}, {30, 30}, {50, 30}, {70, 30}};

  HeatmapFrame weak = point_frame(straight, e);
  weak.at(Channel::LvPosterior, 30, 50) = 0.29f;
  const auto w = decode_frame(weak.view(), cfg, 0);
  const bool empty_ok = !w.quality.kept() && w.quality.has(QualityReason::EmptyChannel) &&
                        !w.keypoints.points[index(Channel::LvPosterior)].has_value();

  // Last segment bent by atan(12/20) = 30.96 deg, then by atan(10/18) = 29.05 deg.
  const auto wide = decode_frame(point_frame({Point2{10, 30}, {30, 30}, {50, 30}, {70, 42}}, e).view(), cfg, 0);
  const auto narrow = decode_frame(point_frame({Point2{10, 30}, {30, 30}, {50, 30}, {68, 40}}, e).view(), cfg, 0);
  const double wide_spread = max_angle_spread(segment_angles(wide.keypoints.positions()));
  const double narrow_spread = max_angle_spread(segment_angles(narrow.keypoints.positions()));
  const bool angle_ok = !wide.quality.kept() && wide.quality.has(QualityReason::AngleInconsistent) &&
                        narrow.quality.kept();
  return {empty_ok && angle_ok,
          fmt("0.29 peak -> %s; %.2f deg spread -> %s; %.2f deg spread -> %s", empty_ok ? "EMPTY_CHANNEL" : "kept",
              wide_spread, wide.quality.kept() ? "kept" : "ANGLE_INCONSISTENT", narrow_spread,
              narrow.quality.kept() ? "kept" : "excluded")};
}

Outcome statistics_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> level(0, 6);
  std::size_t cases = 0;
  double worst = 0.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<double> scores(n);
    for (auto& s : scores) s = 0.125 * level(rng);  // coarse grid: ties occur
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      ScoredLabels d;
      d.scores = scores;
      for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>((mask >> i) & 1u));
      worst = std::max(worst, std::abs(roc_auc(d).auc - oracle::pairwise_auc(d.scores, d.labels)));
      ++cases;
    }
  }

  constexpr int kSims = 1000;
  constexpr double kTrueBias = 0.3;
  int covered = 0;
  std::normal_distribution<double> ref_dist(4.5, 0.8), err_dist(kTrueBias, 0.5);
  for (int sim = 0; sim < kSims; ++sim) {
    PairedSample s;
    for (int i = 0; i < 50; ++i) {
      const double r = ref_dist(rng);
      s.ref.push_back(r);
      s.pred.push_back(r + err_dist(rng));
    }
    BootstrapConfig cfg;
    cfg.n_resamples = 10'000;
    cfg.seed = static_cast<std::uint64_t>(sim);
    const Interval ci = bootstrap_ci(s, Statistic::Bias, cfg);
    if (ci.lo <= kTrueBias && kTrueBias <= ci.hi) ++covered;
  }
  const double coverage = static_cast<double>(covered) / kSims;
  const double secs = seconds_since(t0);
  return {cases >= 500 && worst <= 1e-12 && coverage >= 0.93 && coverage <= 0.97 && secs < 120.0,
          fmt("AUC vs brute force on %zu label patterns (max diff %.1e); bias CI coverage %.3f; %.1f s", cases, worst,
              coverage, secs)};
}

Outcome performance() {
  PhantomConfig phantom;
  phantom.origin = {200.0, 220.0};
  phantom.duration_s = 4.0;
  const Trajectory t = generate_trajectory(phantom);
  const Extent extent{480, 640};
  MockModelConfig mock;
  mock.noise_sigma_px = 1.0;
  std::vector<HeatmapFrame> frames;
  for (std::size_t i = 0; i < t.frames(); ++i) frames.push_back(render_frame(t, i, mock, extent));

  const DecodeConfig cfg;
  std::vector<double> per_frame;
  std::size_t kept = 0;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto f0 = Clock::now();
    const auto d = decode_frame(frames[i].view(), cfg, i);
    per_frame.push_back(seconds_since(f0));
    kept += d.quality.kept() ? 1 : 0;
  }
  const double total = seconds_since(t0);
  std::sort(per_frame.begin(), per_frame.end());
  const double median_ms = 1e3 * per_frame[per_frame.size() / 2];
  const double worst_ms = 1e3 * per_frame.back();
  const double fps = static_cast<double>(frames.size()) / total;
  return {median_ms < 10.0 && fps >= 100.0 && kept == frames.size(),
          fmt("4x480x640 decode median %.2f ms (max %.2f ms), sustained %.0f frames/s over %zu frames", median_ms,
              worst_ms, fps, frames.size())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("echobeat_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream pairs(dir / "pairs.csv");
    pairs << "id,pred,ref\n";
    for (int i = 0; i < 30; ++i) pairs << "s" << i << ',' << 1.0 + 0.02 * i + 0.05 * std::cos(i) << ',' << 1.0 + 0.02 * i << '\n';
    std::ofstream scores(dir / "scores.csv");
    scores << "id,score,label\n";
    for (int i = 0; i < 25; ++i) scores << "s" << i << ',' << std::fmod(0.61 * i, 1.0) << ',' << (i % 4 == 0) << '\n';
    std::ofstream config(dir / "config.json");
    config << R"({"mock": {"noise_sigma_px": 1.0, "dropout_prob": 0.05}, "lvh": {"ivs_threshold_cm": 1.1, "lvpw_threshold_cm": 1.1}})";
  }
  auto path = [&](const std::string& name) { return "'" + (dir / name).string() + "'"; };
  const std::string cfg = " --config " + path("config.json");

  // Each entry: subcommand arguments writing to the given output name.
  const std::vector<std::pair<std::string, std::string>> steps{
      {"synth" + cfg + " --seed 11 --out " + path("study@"), "study@"},
      {"rasterize --annotations " + path("study1/annotations.json") + " --height 120 --width 200 --seed 11 --out " +
           path("labels@.eht"),
       "labels@.eht"},
      {"decode --heatmaps " + path("study1/heatmaps.eht") + " --calibration " + path("study1/annotations.json") +
           " --jobs 2 --out " + path("frames@.jsonl"),
       "frames@.jsonl"},
      {"beats --frames " + path("frames1.jsonl") + " --fps 50 --out " + path("beats@.json"), "beats@.json"},
      {"report" + cfg + " --beats " + path("beats1.json") + " --out " + path("report@.json"), "report@.json"},
      {"evaluate --pred " + path("pairs.csv") + " --statistic mae --bootstrap 10000 --seed 7 --out " +
           path("eval@.json"),
       "eval@.json"},
      {"roc --scores " + path("scores.csv") + " --out " + path("roc@.json"), "roc@.json"},
      {"losscheck --grad-check --seed 7 --out " + path("loss@.json"), "loss@.json"},
  };

  std::string mismatched;
  for (const auto& [args, name] : steps) {
    for (const char* run : {"1", "2"}) {
      std::string a = args;
      a.replace(a.find('@'), 1, run);
      const std::string cmd = std::string(ECHOBEAT_CLI) + " " + a + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) mismatched += " " + name.substr(0, name.find('@')) + "(failed)";
    }
    auto at = [&](const char* run) {
      std::string n = name;
      return dir / n.replace(n.find('@'), 1, run);
    };
    std::vector<std::pair<fs::path, fs::path>> files;
    if (fs::is_directory(at("1"))) {
      for (const char* f : {"heatmaps.eht", "annotations.json", "truth.csv"}) files.emplace_back(at("1") / f, at("2") / f);
    } else {
      files.emplace_back(at("1"), at("2"));
    }
    for (const auto& [a, b] : files) {
      if (!fs::exists(a) || slurp(a).empty() || slurp(a) != slurp(b)) mismatched += " " + a.filename().string();
    }
  }
  fs::remove_all(dir);
  return {mismatched.empty(), mismatched.empty() ? "8 subcommands byte-identical across two runs"
                                                 : "differences:" + mismatched};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"loss correctness", loss_correctness},
      {"gradient check", gradient_check},
      {"rasterize/decode round trip", rasterize_round_trip},
      {"end-to-end phantom oracle", end_to_end},
      {"noise monotonicity", noise_monotonicity},
      {"quality heuristics", heuristic_fidelity},
      {"statistics oracles", statistics_oracles},
      {"decode performance", performance},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
