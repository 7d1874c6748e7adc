#include "echobeat/formats.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace echobeat {

namespace {

[[noreturn]] void format_error(const std::string& what, Error::Context ctx = {}) {
  throw Error(ErrorCode::Format, what, std::move(ctx));
}

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) format_error("missing field", {{"field", key}});
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    format_error("field has the wrong type", {{"field", key}});
  }
}

void check_schema(const Json& j) {
  if (j.is_object() && j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    format_error("unsupported schema_version", {{"schema_version", j.at("schema_version").dump()}});
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    format_error("malformed number in CSV", {{"line", std::to_string(line_no)}, {"value", s}});
  }
  return v;
}

// Rows of a headered 3-column CSV; blank lines are skipped.
std::vector<std::array<std::string, 3>> read_csv3(std::istream& in, const std::array<std::string, 3>& header) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::array<std::string, 3>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3) {
      format_error("CSV row must have exactly 3 columns", {{"line", std::to_string(line_no)}});
    }
    std::array<std::string, 3> row{cells[0], cells[1], cells[2]};
    if (!have_header) {
      if (row != header) {
        format_error("unexpected CSV header", {{"expected", header[0] + "," + header[1] + "," + header[2]},
                                               {"got", trim(line)}});
      }
      have_header = true;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) format_error("CSV is empty (missing header)");
  return rows;
}

std::vector<std::pair<std::string, double>> read_id_value_csv(std::istream& in, const std::string& column) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::pair<std::string, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) format_error("CSV row must have exactly 2 columns", {{"line", std::to_string(line_no)}});
    if (!have_header) {
      if (cells[0] != "id" || cells[1] != column) {
        format_error("unexpected CSV header", {{"expected", "id," + column}, {"got", trim(line)}});
      }
      have_header = true;
      continue;
    }
    rows.emplace_back(cells[0], parse_double(cells[1], line_no));
  }
  if (!have_header) format_error("CSV is empty (missing header)");
  return rows;
}

Json stats_json(const StudySummary& s, const MeasureStats& m) {
  return Json{{"value", s.value(m)},
              {"mean", m.mean},
              {"median", m.median},
              {"sd", m.sd ? Json(*m.sd) : Json(nullptr)},
              {"min", m.min},
              {"max", m.max}};
}

Json spread_json(const Spread& s) { return Json{{"range", s.range}, {"sd", s.sd}}; }

const char* phase_name(Phase p) { return p == Phase::Diastole ? "diastole" : "systole"; }

}  // namespace

Json to_json(const FrameRecord& r) {
  Json points = Json::array();
  for (Channel c : kChannels) {
    const auto& kp = r.keypoints.points[index(c)];
    if (!kp) {
      points.push_back(nullptr);
      continue;
    }
    points.push_back(Json{{"name", channel_name(c)},
                          {"x", kp->position.x},
                          {"y", kp->position.y},
                          {"confidence", kp->confidence}});
  }
  Json reasons = Json::array();
  for (auto reason : r.quality.reasons()) reasons.push_back(to_string(reason));
  Json j{{"schema_version", kSchemaVersion},
         {"frame_index", r.frame_index},
         {"points", std::move(points)},
         {"quality", Json{{"kept", r.quality.kept()}, {"reasons", std::move(reasons)}}}};
  if (r.measurement) {
    j["ivs_cm"] = r.measurement->ivs;
    j["lvid_cm"] = r.measurement->lvid;
    j["lvpw_cm"] = r.measurement->lvpw;
  }
  return j;
}

FrameRecord frame_record_from_json(const Json& j) {
  check_schema(j);
  FrameRecord r;
  r.frame_index = get_field<std::size_t>(j, "frame_index");
  r.keypoints.frame_index = r.frame_index;
  const Json& points = j.contains("points") ? j.at("points") : Json();
  if (!points.is_array() || points.size() != kNumChannels) {
    format_error("frame record needs 4 point slots", {{"frame_index", std::to_string(r.frame_index)}});
  }
  for (std::size_t i = 0; i < kNumChannels; ++i) {
    const Json& p = points[i];
    if (p.is_null()) continue;
    const auto name = get_field<std::string>(p, "name");
    const auto c = parse_channel(name);
    if (!c || index(*c) != i) format_error("point name does not match its slot", {{"name", name}});
    r.keypoints.points[i] = Keypoint{Point2{get_field<double>(p, "x"), get_field<double>(p, "y")},
                                     get_field<double>(p, "confidence"), *c};
  }
  const Json& quality = j.contains("quality") ? j.at("quality") : Json();
  for (const auto& reason : get_field<std::vector<std::string>>(quality, "reasons")) {
    if (reason == to_string(QualityReason::EmptyChannel)) {
      r.quality.add(QualityReason::EmptyChannel);
    } else if (reason == to_string(QualityReason::AngleInconsistent)) {
      r.quality.add(QualityReason::AngleInconsistent);
    } else {
      format_error("unknown quality reason", {{"reason", reason}});
    }
  }
  if (get_field<bool>(quality, "kept") != r.quality.kept()) {
    format_error("quality.kept disagrees with reasons", {{"frame_index", std::to_string(r.frame_index)}});
  }
  const bool has_measurement = j.contains("lvid_cm");
  if (has_measurement != r.quality.kept()) {
    format_error("measurement fields must be present iff the frame is kept",
                 {{"frame_index", std::to_string(r.frame_index)}});
  }
  if (has_measurement) {
    r.measurement = MeasurementTriple{get_field<double>(j, "ivs_cm"), get_field<double>(j, "lvid_cm"),
                                      get_field<double>(j, "lvpw_cm")};
  }
  return r;
}

void write_frames_jsonl(std::ostream& out, std::span<const FrameRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<FrameRecord> read_frames_jsonl(std::istream& in) {
  std::vector<FrameRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(frame_record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::parse_error&) {
      format_error("frame record is not valid JSON", {{"line", std::to_string(line_no)}});
    } catch (const Error& e) {
      auto ctx = e.context();
      ctx["line"] = std::to_string(line_no);
      throw Error(e.code(), e.what(), ctx);
    }
  }
  return out;
}

Json to_json(const MeasurementTriple& m) {
  return Json{{"ivs_cm", m.ivs}, {"lvid_cm", m.lvid}, {"lvpw_cm", m.lvpw}};
}

MeasurementTriple measurement_from_json(const Json& j) {
  return MeasurementTriple{get_field<double>(j, "ivs_cm"), get_field<double>(j, "lvid_cm"),
                           get_field<double>(j, "lvpw_cm")};
}

Json to_json(const BeatRecord& b) {
  return Json{{"beat_index", b.beat_index},
              {"diastole_frame", b.diastole_frame},
              {"systole_frame", b.systole_frame},
              {"diastolic", to_json(b.diastolic)},
              {"systolic", to_json(b.systolic)}};
}

Json to_json(const BeatsDoc& d) {
  Json beats = Json::array();
  for (const auto& b : d.beats) beats.push_back(to_json(b));
  return Json{{"schema_version", kSchemaVersion},
              {"fps", d.fps},
              {"n_frames", d.n_frames},
              {"n_beats", d.beats.size()},
              {"beats", std::move(beats)}};
}

BeatsDoc beats_doc_from_json(const Json& j) {
  check_schema(j);
  BeatsDoc d;
  d.fps = get_field<double>(j, "fps");
  d.n_frames = get_field<std::size_t>(j, "n_frames");
  if (!j.contains("beats") || !j.at("beats").is_array()) format_error("missing beats array");
  for (const auto& b : j.at("beats")) {
    BeatRecord r;
    r.beat_index = get_field<std::size_t>(b, "beat_index");
    r.diastole_frame = get_field<std::size_t>(b, "diastole_frame");
    r.systole_frame = get_field<std::size_t>(b, "systole_frame");
    if (!b.contains("diastolic") || !b.contains("systolic")) format_error("beat lacks measurements");
    r.diastolic = measurement_from_json(b.at("diastolic"));
    r.systolic = measurement_from_json(b.at("systolic"));
    d.beats.push_back(r);
  }
  return d;
}

Json study_report_json(const StudySummary& s, const Json& config_echo) {
  Json per_beat = Json::array();
  for (const auto& b : s.per_beat) per_beat.push_back(to_json(b));
  Json spread = nullptr;
  if (s.n_beats >= 2) {
    const BeatSpread bs = beat_spread(s.per_beat);
    spread = Json{{"ivsd", spread_json(bs.ivsd)},
                  {"lvidd", spread_json(bs.lvidd)},
                  {"lvpwd", spread_json(bs.lvpwd)},
                  {"lvids", spread_json(bs.lvids)}};
  }
  return Json{{"schema_version", kSchemaVersion},
              {"n_beats", s.n_beats},
              {"aggregation", s.aggregation == Aggregation::Mean ? "mean" : "median"},
              {"ivsd", stats_json(s, s.ivsd)},
              {"lvidd", stats_json(s, s.lvidd)},
              {"lvpwd", stats_json(s, s.lvpwd)},
              {"lvids", stats_json(s, s.lvids)},
              {"lvh_flag", s.lvh_flag ? Json(*s.lvh_flag) : Json(nullptr)},
              {"beat_spread", std::move(spread)},
              {"per_beat", std::move(per_beat)},
              {"config_echo", config_echo}};
}

Json eval_report_json(Statistic statistic, const Interval& ci, double level,
                      std::optional<double> r2_cod, const Json& config) {
  Json j{{"schema_version", kSchemaVersion},
         {"statistic", to_string(statistic)},
         {"point", ci.point},
         {"ci_lo", ci.lo},
         {"ci_hi", ci.hi},
         {"level", level},
         {"n", ci.n},
         {"n_resamples", ci.n_resamples},
         {"n_skipped", ci.n_skipped}};
  if (r2_cod) j["r2_cod"] = *r2_cod;
  j["config"] = config;
  return j;
}

Json roc_report_json(const RocCurve& roc, const PrCurve& pr) {
  Json roc_points = Json::array();
  for (const auto& p : roc.points) {
    roc_points.push_back(Json{{"threshold", std::isinf(p.threshold) ? Json(nullptr) : Json(p.threshold)},
                              {"fpr", p.fpr},
                              {"tpr", p.tpr}});
  }
  Json pr_points = Json::array();
  for (const auto& p : pr.points) {
    pr_points.push_back(Json{{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"auc", roc.auc},
              {"average_precision", pr.average_precision},
              {"n_pos", roc.n_pos},
              {"n_neg", roc.n_neg},
              {"roc", std::move(roc_points)},
              {"pr", std::move(pr_points)}};
}

Json error_json(const std::string& code, const std::string& message, const Json& context) {
  return Json{{"schema_version", kSchemaVersion}, {"code", code}, {"message", message}, {"context", context}};
}

Json to_json(const AnnotationDoc& d) {
  Json frames = Json::array();
  for (const auto& f : d.frames) {
    Json points = Json::array();
    for (Channel c : kChannels) {
      points.push_back(Json{{"name", channel_name(c)}, {"x", f.points[index(c)].x}, {"y", f.points[index(c)].y}});
    }
    frames.push_back(Json{{"frame_index", f.frame_index},
                          {"phase", f.phase ? Json(phase_name(*f.phase)) : Json(nullptr)},
                          {"points", std::move(points)}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"video_id", d.video_id},
              {"fps", d.fps},
              {"cm_per_pixel", d.cm_per_pixel},
              {"frames", std::move(frames)}};
}

AnnotationDoc annotation_doc_from_json(const Json& j) {
  check_schema(j);
  AnnotationDoc d;
  d.video_id = get_field<std::string>(j, "video_id");
  d.fps = get_field<double>(j, "fps");
  d.cm_per_pixel = get_field<double>(j, "cm_per_pixel");
  if (!j.contains("frames") || !j.at("frames").is_array()) format_error("missing frames array");
  std::set<std::size_t> seen_frames;
  for (const auto& f : j.at("frames")) {
    Annotation a;
    a.frame_index = get_field<std::size_t>(f, "frame_index");
    if (!seen_frames.insert(a.frame_index).second) {
      format_error("duplicate annotated frame", {{"frame_index", std::to_string(a.frame_index)}});
    }
    if (f.contains("phase") && !f.at("phase").is_null()) {
      const auto phase = get_field<std::string>(f, "phase");
      if (phase == "diastole") {
        a.phase = Phase::Diastole;
      } else if (phase == "systole") {
        a.phase = Phase::Systole;
      } else {
        format_error("phase must be diastole, systole or null", {{"phase", phase}});
      }
    }
    if (!f.contains("points") || !f.at("points").is_array() || f.at("points").size() != kNumChannels) {
      format_error("annotation needs exactly 4 points", {{"frame_index", std::to_string(a.frame_index)}});
    }
    std::array<bool, kNumChannels> filled{};
    for (const auto& p : f.at("points")) {
      const auto name = get_field<std::string>(p, "name");
      const auto c = parse_channel(name);
      if (!c) format_error("unknown point name", {{"name", name}});
      if (filled[index(*c)]) format_error("duplicate point name", {{"name", name}});
      filled[index(*c)] = true;
      a.points[index(*c)] = Point2{get_field<double>(p, "x"), get_field<double>(p, "y")};
    }
    d.frames.push_back(a);
  }
  return d;
}

Calibration calibration_from_json(const Json& j) {
  return Calibration::make(get_field<double>(j, "cm_per_pixel"), get_field<double>(j, "fps"));
}

PairedSample read_paired_csv(std::istream& in) {
  PairedSample s;
  std::size_t line_no = 1;
  for (const auto& row : read_csv3(in, {"id", "pred", "ref"})) {
    ++line_no;
    s.ids.push_back(row[0]);
    s.pred.push_back(parse_double(row[1], line_no));
    s.ref.push_back(parse_double(row[2], line_no));
  }
  return s;
}

void write_paired_csv(std::ostream& out, const PairedSample& s) {
  out << "id,pred,ref\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << (s.ids.empty() ? std::to_string(i) : s.ids[i]) << ',' << format_number(s.pred[i]) << ','
        << format_number(s.ref[i]) << '\n';
  }
}

PairedSample read_joined_csv(std::istream& pred_in, std::istream& ref_in) {
  const auto pred = read_id_value_csv(pred_in, "pred");
  const auto ref = read_id_value_csv(ref_in, "ref");
  std::map<std::string, double> ref_by_id;
  for (const auto& [id, v] : ref) {
    if (!ref_by_id.emplace(id, v).second) format_error("duplicate id in reference CSV", {{"id", id}});
  }
  if (pred.size() != ref.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction and reference CSVs have different row counts",
                {{"pred", std::to_string(pred.size())}, {"ref", std::to_string(ref.size())}});
  }
  PairedSample s;
  std::set<std::string> seen;
  for (const auto& [id, v] : pred) {
    if (!seen.insert(id).second) format_error("duplicate id in prediction CSV", {{"id", id}});
    const auto it = ref_by_id.find(id);
    if (it == ref_by_id.end()) {
      throw Error(ErrorCode::LengthMismatch, "prediction id has no reference", {{"id", id}});
    }
    s.ids.push_back(id);
    s.pred.push_back(v);
    s.ref.push_back(it->second);
  }
  return s;
}

ScoredLabels read_scores_csv(std::istream& in) {
  ScoredLabels d;
  std::size_t line_no = 1;
  for (const auto& row : read_csv3(in, {"id", "score", "label"})) {
    ++line_no;
    d.ids.push_back(row[0]);
    d.scores.push_back(parse_double(row[1], line_no));
    if (row[2] != "0" && row[2] != "1") {
      format_error("label must be 0 or 1", {{"line", std::to_string(line_no)}, {"value", row[2]}});
    }
    d.labels.push_back(row[2] == "1" ? 1 : 0);
  }
  return d;
}

void write_scores_csv(std::ostream& out, const ScoredLabels& d) {
  out << "id,score,label\n";
  for (std::size_t i = 0; i < d.scores.size(); ++i) {
    out << (d.ids.empty() ? std::to_string(i) : d.ids[i]) << ',' << format_number(d.scores[i]) << ','
        << d.labels[i] << '\n';
  }
}

void write_truth_csv(std::ostream& out, const Trajectory& t) {
  std::set<std::size_t> dia(t.diastole_frames.begin(), t.diastole_frames.end());
  std::set<std::size_t> sys(t.systole_frames.begin(), t.systole_frames.end());
  out << "frame_index,phase,ivs_cm,lvid_cm,lvpw_cm\n";
  for (std::size_t i = 0; i < t.frames(); ++i) {
    const char* phase = dia.count(i) ? "diastole" : (sys.count(i) ? "systole" : "");
    out << i << ',' << phase << ',' << format_number(t.truth[i].ivs) << ','
        << format_number(t.truth[i].lvid) << ',' << format_number(t.truth[i].lvpw) << '\n';
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open JSON file", {{"path", path.string()}});
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, "file is not valid JSON", {{"path", path.string()}, {"detail", e.what()}});
  }
}

}  // namespace echobeat
