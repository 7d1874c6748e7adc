#pragma once

#include "echobeat/beats.hpp"
#include "echobeat/decode.hpp"
#include "echobeat/labels.hpp"
#include "echobeat/phantom.hpp"
#include "echobeat/stats.hpp"
#include "echobeat/study.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace echobeat {

using Json = nlohmann::ordered_json;

/// Everything a pipeline run can be configured with. Loaded from a JSON file
/// whose top-level sections mirror the members; omitted keys keep defaults and
/// unknown keys are rejected.
struct PipelineConfig {
  PhantomConfig phantom;
  MockModelConfig mock;
  Extent extent{};  // zero means "fit the phantom trajectory"
  JitterConfig jitter;
  LossConfig loss;
  DecodeConfig decode;
  BeatConfig beats;
  std::optional<LvhRule> lvh;
  Aggregation aggregation = Aggregation::Mean;
  BootstrapConfig bootstrap;

  void validate() const;
};

PipelineConfig config_from_json(const Json& j);
PipelineConfig load_config(const std::filesystem::path& path);

Json to_json(const PhantomConfig& c);
Json to_json(const MockModelConfig& c);
Json to_json(const JitterConfig& c);
Json to_json(const LossConfig& c);
Json to_json(const DecodeConfig& c);
Json to_json(const BeatConfig& c);
Json to_json(const LvhRule& c);
Json to_json(const BootstrapConfig& c);
Json to_json(const PipelineConfig& c);

}  // namespace echobeat
