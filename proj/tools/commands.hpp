#pragma once

#include "echobeat/config.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace echobeat::cli {

/// Bad or inconsistent flags; the CLI exits with status 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;  // empty: defaults
  std::optional<std::uint64_t> seed;
  std::string out = "-";  // "-" is stdout
};

struct CalibrationFlags {
  std::string file;
  std::optional<double> cm_per_pixel;
  std::optional<double> fps;
};

struct SynthOptions {
  Common common;
};

struct RasterizeOptions {
  Common common;
  std::string annotations;
  std::optional<std::size_t> height;
  std::optional<std::size_t> width;
  std::optional<double> sigma;
};

struct DecodeOptions {
  Common common;
  std::vector<std::string> heatmaps;
  CalibrationFlags calibration;
  std::size_t first_frame = 0;
  unsigned jobs = 1;
};

struct BeatsOptions {
  Common common;
  std::string frames;
  CalibrationFlags calibration;
};

struct ReportOptions {
  Common common;
  std::string beats;
};

struct EvaluateOptions {
  Common common;
  std::string pred;
  std::string ref;  // empty: pred holds id,pred,ref
  std::string statistic = "mae";
  std::optional<std::size_t> bootstrap;
  std::optional<double> level;
  std::optional<unsigned> jobs;
};

struct RocOptions {
  Common common;
  std::string scores;
};

struct LosscheckOptions {
  Common common;
  std::string pred;  // both empty: random tensors
  std::string labels;
  std::optional<double> alpha;
  std::optional<double> lambda_aux;
  bool grad_check = false;
  CalibrationFlags calibration;
  std::size_t height = 16;
  std::size_t width = 16;
};

void run_synth(const SynthOptions& o);
void run_rasterize(const RasterizeOptions& o);
void run_decode(const DecodeOptions& o);
void run_beats(const BeatsOptions& o);
void run_report(const ReportOptions& o);
void run_evaluate(const EvaluateOptions& o);
void run_roc(const RocOptions& o);
/// Returns false when the gradient check ran and failed.
bool run_losscheck(const LosscheckOptions& o);

}  // namespace echobeat::cli
