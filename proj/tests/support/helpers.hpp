#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "aep/aggregate.hpp"
#include "aep/ingest.hpp"
#include "aep/synth.hpp"

namespace aep::testing {

inline Event lab(std::string code, double value, Day t) {
  return Event{std::move(code), EventKind::kLab, value, t};
}
inline Event drug(std::string code, Day t) { return Event{std::move(code), EventKind::kDrug, std::nullopt, t}; }
inline Event diag(std::string code, Day t) {
  return Event{std::move(code), EventKind::kDiagnosis, std::nullopt, t};
}

// Synthetic events all the way through to a feature matrix.
inline FeatureMatrix synth_matrix(const SynthConfig& config) {
  const SynthOutput out = generate(config);
  std::istringstream in(out.events_csv);
  const ParsedEvents parsed = parse_events(in, EventFormat::kCsv);
  CohortConfig cc;
  cc.target_code = config.target_code;
  cc.window_length_days = config.window_length_days;
  cc.seed = config.seed;
  return build_matrix(build_cohort(parsed.records, cc));
}

// Column-major noise matrix with the given labels.
inline FeatureMatrix matrix_from_columns(const std::vector<std::vector<double>>& columns, std::vector<int> labels) {
  FeatureMatrix m;
  m.labels = std::move(labels);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    m.feature_keys.push_back(FeatureKey{Source::kLab, "X" + std::to_string(1000 + c)});
  }
  m.values.resize(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    m.patient_ids.push_back("P" + std::to_string(r));
    for (std::size_t c = 0; c < m.cols(); ++c) m.values[r * m.cols() + c] = columns[c][r];
  }
  return m;
}

}  // namespace aep::testing
