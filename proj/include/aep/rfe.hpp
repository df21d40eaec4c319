#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string_view>
#include <vector>

#include "aep/aggregate.hpp"
#include "aep/learn.hpp"

namespace aep {

enum class EliminationRule {
  kEliminateLeastImportant,  // standard RFE: drop the weakest features
  kStrongestAboveAlpha,      // drop the strongest feature while its importance exceeds alpha
};

EliminationRule parse_elimination_rule(std::string_view name);
const char* to_string(EliminationRule rule);

struct RfeConfig {
  double alpha = 0.0;  // importance level, used by kStrongestAboveAlpha
  double beta = 0.05;  // tolerated validation-AUC drop below the best seen
  std::size_t k = 10;
  EliminationRule rule = EliminationRule::kEliminateLeastImportant;
  std::size_t step = 1;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RfeIteration {
  std::size_t iteration = 0;
  std::vector<FeatureKey> removed;
  std::size_t remaining = 0;
  double val_auc = 0.0;
};

enum class RfeStop { kReachedK, kAucDrop, kNoCandidates };

const char* to_string(RfeStop stop);

struct RfeResult {
  std::vector<FeatureKey> selected;  // in input column order
  std::vector<RfeIteration> trace;   // iteration 0 is the full model
  RfeStop stop = RfeStop::kReachedK;
  ImportanceVector final_importances;
};

// Fixed stratified train/validation split; refits after every removal and
// keeps the last feature set whose validation AUC stayed within beta of the
// best seen. Throws ConfigError for a non-tree spec or k >= columns.
RfeResult run_rfe(const FeatureMatrix& matrix, const ClassifierSpec& spec, const RfeConfig& config);

// iteration,removed,remaining,val_auc  (removed names joined with ';')
void write_trace_csv(std::ostream& out, const RfeResult& result);

}  // namespace aep
