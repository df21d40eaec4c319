#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aep/aggregate.hpp"
#include "aep/ingest.hpp"
#include "aep/learn.hpp"
#include "aep/rfe.hpp"
#include "aep/synth.hpp"

namespace aep {

// All loaders reject unknown keys and wrong types with a ConfigError that
// names the offending key path.

SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

ClassifierSpec classifier_spec_from_json(const nlohmann::json& j, const std::string& where);
RfeConfig rfe_config_from_json(const nlohmann::json& j);

struct RunConfig {
  std::filesystem::path events;  // resolved against the config file's directory
  EventFormat format = EventFormat::kCsv;
  std::string ade;               // report label, defaults to the target code
  CohortConfig cohort;
  LabTransform lab_transform = LabTransform::kSlope;
  std::vector<ClassifierSpec> classifiers;
  std::optional<RfeConfig> rfe;
  std::vector<IntegrationApproach> approaches;
  std::size_t n_folds = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace aep
