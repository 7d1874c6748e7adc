#pragma once

#include "echobeat/beats.hpp"
#include "echobeat/config.hpp"
#include "echobeat/decode.hpp"
#include "echobeat/phantom.hpp"
#include "echobeat/stats.hpp"
#include "echobeat/study.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace echobeat {

inline constexpr int kSchemaVersion = 1;

// Per-frame JSONL ------------------------------------------------------------

Json to_json(const FrameRecord& r);
FrameRecord frame_record_from_json(const Json& j);
void write_frames_jsonl(std::ostream& out, std::span<const FrameRecord> records);
std::vector<FrameRecord> read_frames_jsonl(std::istream& in);

// Beats ------------------------------------------------------------------------

struct BeatsDoc {
  double fps = 0.0;
  std::size_t n_frames = 0;
  std::vector<BeatRecord> beats;
};

Json to_json(const MeasurementTriple& m);
MeasurementTriple measurement_from_json(const Json& j);
Json to_json(const BeatRecord& b);
Json to_json(const BeatsDoc& d);
BeatsDoc beats_doc_from_json(const Json& j);

// Reports ----------------------------------------------------------------------

Json study_report_json(const StudySummary& s, const Json& config_echo);
Json eval_report_json(Statistic statistic, const Interval& ci, double level,
                      std::optional<double> r2_cod, const Json& config);
Json roc_report_json(const RocCurve& roc, const PrCurve& pr);
Json error_json(const std::string& code, const std::string& message, const Json& context);

// Annotations ------------------------------------------------------------------

enum class Phase { Diastole, Systole };

struct Annotation {
  std::size_t frame_index = 0;
  std::optional<Phase> phase;
  PointQuad points{};
};

/// Sparse expert labels for one video.
struct AnnotationDoc {
  std::string video_id;
  double fps = 0.0;
  double cm_per_pixel = 0.0;
  std::vector<Annotation> frames;
};

Json to_json(const AnnotationDoc& d);
/// Throws Format for missing/duplicate point names or malformed fields.
AnnotationDoc annotation_doc_from_json(const Json& j);

/// Reads {cm_per_pixel, fps} from any JSON object carrying both (an
/// annotation document qualifies).
Calibration calibration_from_json(const Json& j);

// CSV --------------------------------------------------------------------------

/// Header `id,pred,ref`.
PairedSample read_paired_csv(std::istream& in);
void write_paired_csv(std::ostream& out, const PairedSample& s);
/// Joins `id,pred` with `id,ref` on id; the id sets must match exactly.
PairedSample read_joined_csv(std::istream& pred_in, std::istream& ref_in);
/// Header `id,score,label`.
ScoredLabels read_scores_csv(std::istream& in);
void write_scores_csv(std::ostream& out, const ScoredLabels& d);

/// Per-frame ground truth: `frame_index,phase,ivs_cm,lvid_cm,lvpw_cm`.
void write_truth_csv(std::ostream& out, const Trajectory& t);

Json read_json_file(const std::filesystem::path& path);

}  // namespace echobeat
