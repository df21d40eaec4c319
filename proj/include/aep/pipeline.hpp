#pragma once

#include <filesystem>
#include <vector>

#include "aep/config.hpp"
#include "aep/eval.hpp"
#include "aep/ingest.hpp"

namespace aep {

struct RunResult {
  std::vector<ParseWarning> warnings;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_features = 0;
  EvaluationReport report;
  ImportanceVector importances;  // final forest, descending
  std::vector<std::filesystem::path> written;
};

// ingest -> aggregate -> (elimination) -> results grid -> report files.
// Errors are rethrown with the failing stage name prefixed.
RunResult run_pipeline(const RunConfig& config);

// feature,importance sorted by descending importance, ties by name.
void write_importance_csv(std::ostream& out, const ImportanceVector& importances);

}  // namespace aep
