#include "commands.hpp"

#include "echobeat/error.hpp"
#include "echobeat/formats.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

using namespace echobeat;
using namespace echobeat::cli;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("echobeat");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::err;
  if (const char* env = std::getenv("ECHOBEAT_LOG")) {
    const std::string v(env);
    if (v == "debug") level = spdlog::level::debug;
    else if (v == "info") level = spdlog::level::info;
  }
  spdlog::set_level(level);
}

void report_error(const std::string& code, const std::string& message, const Json& context) {
  std::cerr << error_json(code, message, context).dump() << '\n';
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed for every random stream");
  app->add_option("--out", c.out, "Output path, '-' for stdout");
}

void add_calibration(CLI::App* app, CalibrationFlags& f) {
  app->add_option("--calibration", f.file, "JSON file with cm_per_pixel and fps")->check(CLI::ExistingFile);
  app->add_option("--cm-per-pixel", f.cm_per_pixel, "Pixel spacing in cm");
  app->add_option("--fps", f.fps, "Frame rate");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Left-ventricle linear measurement pipeline on keypoint heatmaps"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Render a synthetic study: heatmaps.eht, annotations.json, truth.csv");
  add_common(s, synth.common);

  RasterizeOptions raster;
  auto* r = app.add_subcommand("rasterize", "Turn annotated keypoints into one-hot label tensors");
  add_common(r, raster.common);
  r->add_option("--annotations", raster.annotations, "Annotation JSON, '-' for stdin")->required();
  r->add_option("--height", raster.height, "Label height in px");
  r->add_option("--width", raster.width, "Label width in px");
  r->add_option("--sigma", raster.sigma, "Label jitter in px");

  DecodeOptions dec;
  auto* d = app.add_subcommand("decode", "Decode heatmap tensors into per-frame keypoints (JSONL)");
  add_common(d, dec.common);
  d->add_option("--heatmaps", dec.heatmaps, "Tensor file [F,4,H,W], '-' for stdin")->required();
  add_calibration(d, dec.calibration);
  d->add_option("--first-frame", dec.first_frame, "Frame index of the first tensor frame");
  d->add_option("--jobs", dec.jobs, "Worker threads")->check(CLI::PositiveNumber);

  BeatsOptions beats;
  auto* b = app.add_subcommand("beats", "Detect beats in a per-frame JSONL stream");
  add_common(b, beats.common);
  b->add_option("--frames", beats.frames, "Frame records (JSONL), '-' for stdin")->required();
  add_calibration(b, beats.calibration);

  ReportOptions rep;
  auto* p = app.add_subcommand("report", "Aggregate beats into a study report");
  add_common(p, rep.common);
  p->add_option("--beats", rep.beats, "Beats JSON, '-' for stdin")->required();

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Agreement statistic with a bootstrap interval");
  add_common(e, ev.common);
  e->add_option("--pred", ev.pred, "CSV id,pred (or id,pred,ref without --ref)")->required();
  e->add_option("--ref", ev.ref, "CSV id,ref")->check(CLI::ExistingFile);
  e->add_option("--statistic", ev.statistic, "mae, r2 or bias")
      ->check(CLI::IsMember({"mae", "r2", "bias"}));
  e->add_option("--bootstrap", ev.bootstrap, "Number of bootstrap resamples");
  e->add_option("--level", ev.level, "Interval level");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  RocOptions roc;
  auto* o = app.add_subcommand("roc", "ROC and precision-recall curves");
  add_common(o, roc.common);
  o->add_option("--scores", roc.scores, "CSV id,score,label, '-' for stdin")->required();

  LosscheckOptions loss;
  auto* l = app.add_subcommand("losscheck", "Evaluate the training loss and optionally check its gradient");
  add_common(l, loss.common);
  l->add_option("--pred", loss.pred, "Prediction tensor");
  l->add_option("--labels", loss.labels, "Label tensor");
  l->add_option("--alpha", loss.alpha, "Background weight");
  l->add_option("--lambda-aux", loss.lambda_aux, "Weight of the location and measurement terms");
  l->add_flag("--grad-check", loss.grad_check, "Compare the analytic gradient with finite differences");
  add_calibration(l, loss.calibration);
  l->add_option("--height", loss.height, "Random tensor height");
  l->add_option("--width", loss.width, "Random tensor width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (s->parsed()) run_synth(synth);
    else if (r->parsed()) run_rasterize(raster);
    else if (d->parsed()) run_decode(dec);
    else if (b->parsed()) run_beats(beats);
    else if (p->parsed()) run_report(rep);
    else if (e->parsed()) run_evaluate(ev);
    else if (o->parsed()) run_roc(roc);
    else if (l->parsed() && !run_losscheck(loss)) {
      report_error("GradientCheckFailed", "analytic and numeric gradients disagree", Json::object());
      return kExitData;
    }
  } catch (const UsageError& err) {
    report_error("UsageError", err.what(), Json::object());
    return kExitUsage;
  } catch (const Error& err) {
    Json ctx = Json::object();
    for (const auto& [k, v] : err.context()) ctx[k] = v;
    report_error(std::string(to_string(err.code())), err.what(), ctx);
    return kExitData;
  } catch (const nlohmann::json::exception& err) {
    report_error("FormatError", err.what(), Json::object());
    return kExitData;
  } catch (const std::exception& err) {
    report_error("InternalError", err.what(), Json::object());
    return kExitData;
  }
  return 0;
}
