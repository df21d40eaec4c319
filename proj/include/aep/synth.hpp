#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aep/aggregate.hpp"

namespace aep {

enum class PlantedEffect {
  kCountShift,  // extra in-window occurrences of a categorical code
  kSlopeShift,  // lab trend shifted by `magnitude` value units per day
};

struct InformativeFeature {
  FeatureKey key;
  PlantedEffect effect = PlantedEffect::kCountShift;
  double magnitude = 0.0;
};

enum class CodeFrequency { kUniform, kZipf };

struct SynthConfig {
  int n_patients = 400;
  double positive_fraction = 0.2;
  int n_lab_codes = 30;
  int n_drug_codes = 35;
  int n_diag_codes = 35;
  std::vector<InformativeFeature> informative;
  double events_per_patient = 40.0;  // mean categorical events inside the window
  int window_length_days = 90;
  std::string target_code = "D61.1";
  CodeFrequency code_frequency = CodeFrequency::kUniform;
  double lab_presence = 0.6;   // chance a patient has a series for a given lab code
  double lab_slope_sd = 0.02;  // background trend spread, value units per day
  double lab_noise_sd = 1.0;
  int history_days = 730;      // spread of index days across the calendar
  std::uint64_t seed = 0;

  // Throws ConfigError for infeasible settings.
  void validate() const;
};

// Code universes used by the generator, in index order.
std::string lab_code(int i);
std::string drug_code(int i);
std::string diag_code(int i);

// Default benchmark: 400 patients, 20% positive, 100 codes, five planted
// features spread over L, M and D.
SynthConfig canonical_synth_config(std::uint64_t seed);

struct SynthOutput {
  std::string events_csv;     // ingest CSV format
  std::string manifest_json;  // ground truth
  int n_positive = 0;
  int n_negative = 0;
};

SynthOutput generate(const SynthConfig& config);

}  // namespace aep
