#include "echobeat/config.hpp"

#include "echobeat/error.hpp"

#include <fstream>
#include <set>
#include <string>

namespace echobeat {

namespace {

[[noreturn]] void config_error(const std::string& what, const std::string& key) {
  throw Error(ErrorCode::InvalidConfig, what, {{"key", key}});
}

// Reads optional keys of one JSON object and rejects keys nobody asked for.
class Section {
public:
  Section(const Json& j, std::string name) : json_(j), name_(std::move(name)) {
    if (!j.is_object()) config_error("config section must be an object", name_);
  }

  template <typename T>
  void read(const char* key, T& dst) {
    seen_.insert(key);
    if (!json_.contains(key)) return;
    try {
      dst = json_.at(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
      config_error("config value has the wrong type", name_ + "." + key);
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    return json_.contains(key) ? &json_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!seen_.count(key)) config_error("unknown config key", name_.empty() ? key : name_ + "." + key);
    }
  }

private:
  const Json& json_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_phantom(const Json& j, PhantomConfig& c) {
  Section s(j, "phantom");
  s.read("fps", c.fps);
  s.read("duration_s", c.duration_s);
  if (const Json* p = s.child("period_s")) {
    if (p->is_number()) {
      c.period_s = {p->get<double>()};
    } else if (p->is_array()) {
      c.period_s = p->get<std::vector<double>>();
    } else {
      config_error("period_s must be a number or an array of numbers", "phantom.period_s");
    }
  }
  s.read("lvid_d", c.lvid_d);
  s.read("lvid_s", c.lvid_s);
  s.read("ivs_d", c.ivs_d);
  s.read("lvpw_d", c.lvpw_d);
  s.read("wall_gain", c.wall_gain);
  s.read("axis_angle_deg", c.axis_angle_deg);
  if (const Json* o = s.child("origin")) {
    Section os(*o, "phantom.origin");
    os.read("x", c.origin.x);
    os.read("y", c.origin.y);
    os.finish();
  }
  s.read("cm_per_pixel", c.cm_per_pixel);
  s.finish();
}

void read_mock(const Json& j, MockModelConfig& c) {
  Section s(j, "mock");
  s.read("noise_sigma_px", c.noise_sigma_px);
  s.read("blob_sigma_px", c.blob_sigma_px);
  s.read("peak_value", c.peak_value);
  s.read("dropout_prob", c.dropout_prob);
  s.read("seed", c.seed);
  s.finish();
}

void read_loss(const Json& j, LossConfig& c) {
  Section s(j, "loss");
  s.read("alpha", c.alpha);
  s.read("lambda_aux", c.lambda_aux);
  std::string centroid = c.centroid == CentroidWeighting::Linear ? "linear" : "exponential";
  s.read("centroid", centroid);
  if (centroid == "linear") {
    c.centroid = CentroidWeighting::Linear;
  } else if (centroid == "exponential") {
    c.centroid = CentroidWeighting::Exponential;
  } else {
    config_error("loss.centroid must be \"linear\" or \"exponential\"", "loss.centroid");
  }
  s.finish();
}

void read_beats(const Json& j, BeatConfig& c) {
  Section s(j, "beats");
  s.read("max_heart_rate", c.max_heart_rate);
  s.read("min_prominence_frac", c.min_prominence_frac);
  s.read("smooth_median_window", c.smooth_median_window);
  if (const Json* w = s.child("smooth_mean_window")) {
    if (w->is_null()) {
      c.smooth_mean_window.reset();
    } else if (w->is_number_unsigned()) {
      c.smooth_mean_window = w->get<std::size_t>();
    } else {
      config_error("smooth_mean_window must be a positive integer or null", "beats.smooth_mean_window");
    }
  }
  s.read("smooth", c.smooth);
  s.finish();
}

void read_lvh(const Json& j, std::optional<LvhRule>& rule) {
  if (j.is_null()) {
    rule.reset();
    return;
  }
  LvhRule r;
  Section s(j, "lvh");
  s.read("ivs_threshold_cm", r.ivs_threshold_cm);
  s.read("lvpw_threshold_cm", r.lvpw_threshold_cm);
  std::string comb = "any";
  s.read("combinator", comb);
  if (comb == "any") {
    r.combinator = Combinator::Any;
  } else if (comb == "all") {
    r.combinator = Combinator::All;
  } else {
    config_error("lvh.combinator must be \"any\" or \"all\"", "lvh.combinator");
  }
  s.finish();
  r.validate();
  rule = r;
}

}  // namespace

void PipelineConfig::validate() const {
  phantom.validate();
  mock.validate();
  jitter.validate();
  loss.validate();
  decode.validate();
  beats.validate();
  if (lvh) lvh->validate();
  bootstrap.validate();
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  Section top(j, "");
  if (const Json* p = top.child("phantom")) read_phantom(*p, c.phantom);
  if (const Json* p = top.child("mock")) read_mock(*p, c.mock);
  if (const Json* p = top.child("extent")) {
    Section s(*p, "extent");
    s.read("height", c.extent.height);
    s.read("width", c.extent.width);
    s.finish();
  }
  if (const Json* p = top.child("jitter")) {
    Section s(*p, "jitter");
    s.read("sigma", c.jitter.sigma);
    s.read("seed", c.jitter.seed);
    s.finish();
  }
  if (const Json* p = top.child("loss")) read_loss(*p, c.loss);
  if (const Json* p = top.child("decode")) {
    Section s(*p, "decode");
    s.read("confidence_threshold", c.decode.confidence_threshold);
    s.read("max_angle_spread", c.decode.max_angle_spread);
    s.read("weighted_centroid", c.decode.weighted_centroid);
    s.finish();
  }
  if (const Json* p = top.child("beats")) read_beats(*p, c.beats);
  if (const Json* p = top.child("lvh")) read_lvh(*p, c.lvh);
  if (const Json* p = top.child("aggregation")) {
    const std::string a = p->is_string() ? p->get<std::string>() : "";
    if (a == "mean") {
      c.aggregation = Aggregation::Mean;
    } else if (a == "median") {
      c.aggregation = Aggregation::Median;
    } else {
      config_error("aggregation must be \"mean\" or \"median\"", "aggregation");
    }
  }
  if (const Json* p = top.child("bootstrap")) {
    Section s(*p, "bootstrap");
    s.read("n_resamples", c.bootstrap.n_resamples);
    s.read("level", c.bootstrap.level);
    s.read("seed", c.bootstrap.seed);
    s.read("jobs", c.bootstrap.jobs);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file", {{"path", path.string()}});
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, "config file is not valid JSON",
                {{"path", path.string()}, {"detail", e.what()}});
  }
  return config_from_json(j);
}

Json to_json(const PhantomConfig& c) {
  return Json{{"fps", c.fps},
              {"duration_s", c.duration_s},
              {"period_s", c.period_s},
              {"lvid_d", c.lvid_d},
              {"lvid_s", c.lvid_s},
              {"ivs_d", c.ivs_d},
              {"lvpw_d", c.lvpw_d},
              {"wall_gain", c.wall_gain},
              {"axis_angle_deg", c.axis_angle_deg},
              {"origin", Json{{"x", c.origin.x}, {"y", c.origin.y}}},
              {"cm_per_pixel", c.cm_per_pixel}};
}

Json to_json(const MockModelConfig& c) {
  return Json{{"noise_sigma_px", c.noise_sigma_px},
              {"blob_sigma_px", c.blob_sigma_px},
              {"peak_value", c.peak_value},
              {"dropout_prob", c.dropout_prob},
              {"seed", c.seed}};
}

Json to_json(const JitterConfig& c) { return Json{{"sigma", c.sigma}, {"seed", c.seed}}; }

Json to_json(const LossConfig& c) {
  return Json{{"alpha", c.alpha},
              {"lambda_aux", c.lambda_aux},
              {"centroid", c.centroid == CentroidWeighting::Linear ? "linear" : "exponential"}};
}

Json to_json(const DecodeConfig& c) {
  return Json{{"confidence_threshold", c.confidence_threshold},
              {"max_angle_spread", c.max_angle_spread},
              {"weighted_centroid", c.weighted_centroid}};
}

Json to_json(const BeatConfig& c) {
  return Json{{"max_heart_rate", c.max_heart_rate},
              {"min_prominence_frac", c.min_prominence_frac},
              {"smooth_median_window", c.smooth_median_window},
              {"smooth_mean_window", c.smooth_mean_window ? Json(*c.smooth_mean_window) : Json(nullptr)},
              {"smooth", c.smooth}};
}

Json to_json(const LvhRule& c) {
  return Json{{"ivs_threshold_cm", c.ivs_threshold_cm},
              {"lvpw_threshold_cm", c.lvpw_threshold_cm},
              {"combinator", c.combinator == Combinator::Any ? "any" : "all"}};
}

Json to_json(const BootstrapConfig& c) {
  return Json{{"n_resamples", c.n_resamples}, {"level", c.level}, {"seed", c.seed}};
}

Json to_json(const PipelineConfig& c) {
  return Json{{"phantom", to_json(c.phantom)},
              {"mock", to_json(c.mock)},
              {"extent", Json{{"height", c.extent.height}, {"width", c.extent.width}}},
              {"jitter", to_json(c.jitter)},
              {"loss", to_json(c.loss)},
              {"decode", to_json(c.decode)},
              {"beats", to_json(c.beats)},
              {"lvh", c.lvh ? to_json(*c.lvh) : Json(nullptr)},
              {"aggregation", c.aggregation == Aggregation::Mean ? "mean" : "median"},
              {"bootstrap", to_json(c.bootstrap)}};
}

}  // namespace echobeat
