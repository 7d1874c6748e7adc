#include "commands.hpp"

#include "echobeat/error.hpp"
#include "echobeat/formats.hpp"
#include "echobeat/labels.hpp"
#include "echobeat/tensor_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

namespace echobeat::cli {

namespace fs = std::filesystem;

namespace {

PipelineConfig load(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
  cfg.validate();
  return cfg;
}

bool is_stdio(const std::string& path) { return path.empty() || path == "-"; }

void with_input(const std::string& path, const std::function<void(std::istream&)>& fn) {
  if (is_stdio(path)) {
    fn(std::cin);
    return;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open input file", {{"path", path}});
  fn(in);
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (is_stdio(path)) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open output file", {{"path", path}});
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing output file", {{"path", path}});
}

void write_json(const std::string& path, const Json& j) {
  with_output(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

Json read_json(const std::string& path) {
  if (!is_stdio(path)) return read_json_file(path);
  try {
    return Json::parse(std::cin);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, "stdin is not valid JSON", {{"detail", e.what()}});
  }
}

Tensor read_tensor_input(const std::string& path) {
  Tensor t;
  with_input(path, [&](std::istream& in) { t = read_tensor(in); });
  return t;
}

// Calibration from a JSON file ({cm_per_pixel, fps}, e.g. annotations.json)
// or from flags. Flags override the file field by field.
std::optional<Calibration> resolve_calibration(const CalibrationFlags& f, bool need_cm, bool need_fps) {
  std::optional<double> cm = f.cm_per_pixel;
  std::optional<double> fps = f.fps;
  if (!f.file.empty()) {
    const Json j = read_json_file(f.file);
    if (!cm && j.contains("cm_per_pixel")) cm = j.at("cm_per_pixel").get<double>();
    if (!fps && j.contains("fps")) fps = j.at("fps").get<double>();
  }
  if (need_cm && !cm) throw UsageError("cm_per_pixel is required: pass --calibration or --cm-per-pixel");
  if (need_fps && !fps) throw UsageError("fps is required: pass --calibration or --fps");
  if (!cm && !fps) return std::nullopt;
  // A missing field the command does not use is filled with a neutral 1.
  return Calibration::make(cm.value_or(1.0), fps.value_or(1.0));
}

Extent synth_extent(const PipelineConfig& cfg, const Trajectory& t) {
  if (cfg.extent.pixels() > 0) return cfg.extent;
  const double margin = std::ceil(4.0 * cfg.mock.blob_sigma_px + 4.0 * cfg.mock.noise_sigma_px) + 2.0;
  return covering_extent(t, margin);
}

Statistic parse_statistic(const std::string& s) {
  if (s == "mae") return Statistic::Mae;
  if (s == "r2") return Statistic::R2;
  if (s == "bias") return Statistic::Bias;
  throw UsageError("--statistic must be one of mae, r2, bias");
}

// Location of the strongest activation per channel; the label's true point.
PointQuad label_points(FrameView label) {
  PointQuad q{};
  const Extent e = label.extent();
  for (Channel c : kChannels) {
    const auto ch = label.channel(c);
    const auto it = std::max_element(ch.begin(), ch.end());
    const auto pos = static_cast<std::size_t>(it - ch.begin());
    q[index(c)] = Point2{static_cast<double>(pos % e.width), static_cast<double>(pos / e.width)};
  }
  return q;
}

}  // namespace

void run_synth(const SynthOptions& o) {
  PipelineConfig cfg = load(o.common);
  if (o.common.seed) cfg.mock.seed = *o.common.seed;
  const Trajectory traj = generate_trajectory(cfg.phantom);
  const Extent extent = synth_extent(cfg, traj);
  spdlog::info("synth: {} frames at {}x{} px", traj.frames(), extent.height, extent.width);
  const Tensor heatmaps = to_tensor(render_heatmaps(traj, cfg.mock, extent));

  if (is_stdio(o.common.out)) {
    write_tensor(std::cout, heatmaps);
    std::cout.flush();
    return;
  }
  const fs::path dir(o.common.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory", {{"path", dir.string()}});

  write_tensor_file(dir / "heatmaps.eht", heatmaps);

  AnnotationDoc doc;
  doc.video_id = "phantom-" + std::to_string(cfg.mock.seed);
  doc.fps = cfg.phantom.fps;
  doc.cm_per_pixel = cfg.phantom.cm_per_pixel;
  for (std::size_t d : traj.diastole_frames) doc.frames.push_back({d, Phase::Diastole, traj.points[d]});
  for (std::size_t s : traj.systole_frames) doc.frames.push_back({s, Phase::Systole, traj.points[s]});
  std::sort(doc.frames.begin(), doc.frames.end(),
            [](const Annotation& a, const Annotation& b) { return a.frame_index < b.frame_index; });
  write_json((dir / "annotations.json").string(), to_json(doc));

  with_output((dir / "truth.csv").string(), [&](std::ostream& out) { write_truth_csv(out, traj); });
}

void run_rasterize(const RasterizeOptions& o) {
  PipelineConfig cfg = load(o.common);
  const AnnotationDoc doc = annotation_doc_from_json(read_json(o.annotations));
  Extent extent = cfg.extent;
  if (o.height) extent.height = *o.height;
  if (o.width) extent.width = *o.width;
  if (extent.pixels() == 0) throw UsageError("rasterize needs an extent: pass --height and --width");
  JitterConfig jitter = cfg.jitter;
  if (o.sigma) jitter.sigma = *o.sigma;
  if (o.common.seed) jitter.seed = *o.common.seed;
  jitter.validate();

  Tensor out;
  out.dims = {static_cast<std::uint32_t>(doc.frames.size()), static_cast<std::uint32_t>(kNumChannels),
              static_cast<std::uint32_t>(extent.height), static_cast<std::uint32_t>(extent.width)};
  out.values.reserve(doc.frames.size() * kNumChannels * extent.pixels());
  for (const auto& f : doc.frames) {
    JitterConfig j = jitter;
    j.seed = derive_seed(jitter.seed, f.frame_index);
    const LabelImage img = rasterize(f.points, extent, j);
    out.values.insert(out.values.end(), img.values().begin(), img.values().end());
  }
  with_output(o.common.out, [&](std::ostream& s) { write_tensor(s, out); });
}

void run_decode(const DecodeOptions& o) {
  const PipelineConfig cfg = load(o.common);
  if (o.heatmaps.empty()) throw UsageError("decode needs at least one --heatmaps input");
  const Calibration cal = *resolve_calibration(o.calibration, true, false);
  const unsigned jobs = std::max(1u, o.jobs);

  auto decode_one = [&](const std::string& input, const std::string& output) {
    const HeatmapStack stack = to_stack(read_tensor_input(input));
    spdlog::info("decode: {} frames from {}", stack.frames(), is_stdio(input) ? "stdin" : input);
    const auto records = decode_video(stack, cfg.decode, cal, o.first_frame, jobs);
    const auto kept = std::count_if(records.begin(), records.end(),
                                    [](const FrameRecord& r) { return r.quality.kept(); });
    spdlog::debug("decode: kept {} of {} frames", kept, records.size());
    with_output(output, [&](std::ostream& out) { write_frames_jsonl(out, records); });
  };

  if (o.heatmaps.size() == 1) {
    decode_one(o.heatmaps.front(), o.common.out);
    return;
  }
  // Several studies: --out names a directory receiving <stem>.frames.jsonl each.
  if (is_stdio(o.common.out)) throw UsageError("decoding several inputs needs --out <directory>");
  std::error_code ec;
  fs::create_directories(o.common.out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory", {{"path", o.common.out}});
  std::vector<std::string> stems;
  for (const auto& in : o.heatmaps) {
    if (is_stdio(in)) throw UsageError("stdin cannot be combined with other --heatmaps inputs");
    stems.push_back(fs::path(in).stem().string());
  }
  auto sorted = stems;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("--heatmaps inputs must have distinct file stems");
  }
  for (std::size_t i = 0; i < o.heatmaps.size(); ++i) {
    decode_one(o.heatmaps[i], (fs::path(o.common.out) / (stems[i] + ".frames.jsonl")).string());
  }
}

void run_beats(const BeatsOptions& o) {
  const PipelineConfig cfg = load(o.common);
  const Calibration cal = *resolve_calibration(o.calibration, false, true);
  std::vector<FrameRecord> records;
  with_input(o.frames, [&](std::istream& in) { records = read_frames_jsonl(in); });
  const auto beats = detect_beats(series_from_records(records, cal.fps), cfg.beats);
  spdlog::info("beats: {} beats in {} frames", beats.size(), records.size());
  write_json(o.common.out, to_json(BeatsDoc{cal.fps, records.size(), beats}));
}

void run_report(const ReportOptions& o) {
  const PipelineConfig cfg = load(o.common);
  const BeatsDoc doc = beats_doc_from_json(read_json(o.beats));
  const StudySummary summary = summarize(doc.beats, cfg.lvh, cfg.aggregation);
  write_json(o.common.out, study_report_json(summary, to_json(cfg)));
}

void run_evaluate(const EvaluateOptions& o) {
  PipelineConfig cfg = load(o.common);
  const Statistic statistic = parse_statistic(o.statistic);
  if (o.bootstrap) cfg.bootstrap.n_resamples = *o.bootstrap;
  if (o.level) cfg.bootstrap.level = *o.level;
  if (o.common.seed) cfg.bootstrap.seed = *o.common.seed;
  if (o.jobs) cfg.bootstrap.jobs = *o.jobs;
  cfg.bootstrap.validate();

  PairedSample sample;
  if (o.ref.empty()) {
    with_input(o.pred, [&](std::istream& in) { sample = read_paired_csv(in); });
  } else {
    std::ifstream ref(o.ref, std::ios::binary);
    if (!ref) throw Error(ErrorCode::Io, "cannot open input file", {{"path", o.ref}});
    with_input(o.pred, [&](std::istream& pred) { sample = read_joined_csv(pred, ref); });
  }

  const Interval ci = bootstrap_ci(sample, statistic, cfg.bootstrap);
  std::optional<double> cod;
  if (statistic == Statistic::R2) {
    try {
      cod = r_squared(sample, RSquaredMode::Cod);
    } catch (const Error&) {
      spdlog::info("evaluate: coefficient of determination undefined for this sample");
    }
  }
  Json config{{"statistic", to_string(statistic)}, {"bootstrap", to_json(cfg.bootstrap)}};
  write_json(o.common.out, eval_report_json(statistic, ci, cfg.bootstrap.level, cod, config));
}

void run_roc(const RocOptions& o) {
  (void)load(o.common);
  ScoredLabels d;
  with_input(o.scores, [&](std::istream& in) { d = read_scores_csv(in); });
  write_json(o.common.out, roc_report_json(roc_auc(d), precision_recall(d)));
}

bool run_losscheck(const LosscheckOptions& o) {
  PipelineConfig cfg = load(o.common);
  if (o.alpha) cfg.loss.alpha = *o.alpha;
  if (o.lambda_aux) cfg.loss.lambda_aux = *o.lambda_aux;
  cfg.loss.validate();
  const std::uint64_t seed = o.common.seed.value_or(0);

  Tensor pred, labels;
  if (o.pred.empty() && o.labels.empty()) {
    // Random prediction against a rasterized random label, one frame.
    if (o.height == 0 || o.width == 0) throw UsageError("--height and --width must be positive");
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> ux(0.0, static_cast<double>(o.width - 1));
    std::uniform_real_distribution<double> uy(0.0, static_cast<double>(o.height - 1));
    std::uniform_real_distribution<float> act(0.0f, 1.0f);
    PointQuad q{};
    for (auto& p : q) p = Point2{ux(rng), uy(rng)};
    const Extent e{o.height, o.width};
    const LabelImage label = rasterize(q, e, JitterConfig{0.0, 0});
    const std::vector<std::uint32_t> dims{1, static_cast<std::uint32_t>(kNumChannels),
                                          static_cast<std::uint32_t>(o.height),
                                          static_cast<std::uint32_t>(o.width)};
    labels = Tensor{dims, std::vector<float>(label.values().begin(), label.values().end())};
    pred = Tensor{dims, std::vector<float>(labels.values.size())};
    for (auto& v : pred.values) v = act(rng);
  } else if (o.pred.empty() || o.labels.empty()) {
    throw UsageError("losscheck needs both --pred and --labels, or neither for random tensors");
  } else {
    pred = read_tensor_input(o.pred);
    labels = read_tensor_input(o.labels);
  }
  if (pred.dims != labels.dims) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and label tensors differ in shape");
  }

  Json report{{"schema_version", kSchemaVersion},
              {"n_elements", pred.values.size()},
              {"alpha", cfg.loss.alpha},
              {"weighted_mse", weighted_mse(pred.values, labels.values, cfg.loss.alpha)}};

  if (auto cal = resolve_calibration(o.calibration, false, false)) {
    const HeatmapStack p = to_stack(pred);
    const HeatmapStack l = to_stack(labels);
    double location = 0.0, measurement = 0.0, total = 0.0;
    for (std::size_t i = 0; i < p.frames(); ++i) {
      const auto a = augmented_loss(p.frame(i), l.frame(i), label_points(l.frame(i)), *cal, cfg.loss);
      location += a.location_term;
      measurement += a.measurement_term;
      total += a.total;
    }
    const double n = static_cast<double>(p.frames());
    report["lambda_aux"] = cfg.loss.lambda_aux;
    report["augmented"] = Json{{"location_term", location / n},
                               {"measurement_term", measurement / n},
                               {"total", total / n}};
  }

  bool passed = true;
  if (o.grad_check) {
    std::vector<double> x(pred.values.begin(), pred.values.end());
    const std::vector<double> y(labels.values.begin(), labels.values.end());
    const auto analytic = weighted_mse_grad(std::span<const double>(x), std::span<const double>(y), cfg.loss.alpha);
    // Every coordinate for small tensors, a seeded sample otherwise.
    std::vector<std::size_t> coords(x.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    constexpr std::size_t kMaxCoords = 2048;
    if (coords.size() > kMaxCoords) {
      std::mt19937_64 rng(derive_seed(seed, 1));
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(kMaxCoords);
      std::sort(coords.begin(), coords.end());
    }
    constexpr double h = 1e-4;
    double worst = 0.0;
    for (std::size_t i : coords) {
      const double keep = x[i];
      x[i] = keep + h;
      const double up = weighted_mse(std::span<const double>(x), std::span<const double>(y), cfg.loss.alpha);
      x[i] = keep - h;
      const double down = weighted_mse(std::span<const double>(x), std::span<const double>(y), cfg.loss.alpha);
      x[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
    constexpr double kTolerance = 1e-5;
    passed = worst < kTolerance;
    report["grad_check"] = Json{{"max_rel_error", worst},
                                {"n_checked", coords.size()},
                                {"step", h},
                                {"tolerance", kTolerance},
                                {"passed", passed}};
  }
  write_json(o.common.out, report);
  return passed;
}

}  // namespace echobeat::cli
