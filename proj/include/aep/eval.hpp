#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aep/aggregate.hpp"
#include "aep/learn.hpp"
#include "aep/rfe.hpp"

namespace aep {

struct FoldAssignment {
  std::vector<std::size_t> fold_of_row;
  std::size_t n_folds = 10;
  std::uint64_t seed = 0;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_not_in(std::size_t fold) const;
};

// Shuffles each class with the seed and deals it round-robin across folds.
// Throws DataError when a class has fewer members than folds.
FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t n_folds, std::uint64_t seed);

// Mann-Whitney AUC with midranks for ties.
double auc(std::span<const double> scores, std::span<const int> labels);

// One AUC per fold: train on the complement, score the held-out rows.
// Fold f trains with seed derive_seed(spec.seed, f).
std::vector<double> cross_validate(const FeatureMatrix& matrix, const ClassifierSpec& spec,
                                   const FoldAssignment& folds);

struct CellResult {
  std::string approach;
  std::string classifier;
  std::size_t n_features = 0;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  double sd_auc = 0.0;  // sample standard deviation across folds
};

struct EvaluationReport {
  std::string ade;
  std::uint64_t seed = 0;
  std::size_t n_folds = 0;
  int window_length = 0;
  std::optional<std::size_t> k;
  std::vector<CellResult> cells;
  std::optional<RfeResult> rfe;  // present when an LMD-kbest cell was evaluated

  const CellResult* find(std::string_view approach, std::string_view classifier) const;
};

struct GridOptions {
  std::string ade;
  std::size_t n_folds = 10;
  std::uint64_t seed = 0;
  std::optional<RfeConfig> rfe;            // required for LMD-kbest
  std::optional<ClassifierSpec> rfe_spec;  // defaults to the first tree-based spec
};

// Every (approach, classifier) cell on one shared fold assignment. The
// elimination stage for LMD-kbest runs once on the training part of fold 0
// and its selection is reused by every fold and classifier.
EvaluationReport results_grid(const FeatureMatrix& matrix, std::span<const IntegrationApproach> approaches,
                              std::span<const ClassifierSpec> specs, const GridOptions& options);

// ade,approach,classifier,fold,auc
void write_fold_csv(std::ostream& out, const EvaluationReport& report);
// ade,approach,classifier,n_features,mean_auc,sd_auc
void write_summary_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace aep
