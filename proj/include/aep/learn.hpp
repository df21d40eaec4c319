#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aep/aggregate.hpp"

namespace aep {

enum class ClassifierKind { kRandomForest, kGradientBoosting, kLinear };

ClassifierKind parse_classifier_kind(std::string_view name);
const char* to_string(ClassifierKind kind);

enum class ClassWeight { kNone, kBalanced };

ClassWeight parse_class_weight(std::string_view name);
const char* to_string(ClassWeight w);

// Number of candidate features examined per split.
struct FeatureSampling {
  enum class Rule { kSqrt, kLog2, kAll, kFixed };
  Rule rule = Rule::kSqrt;
  int count = 0;  // used by kFixed

  std::size_t resolve(std::size_t n_features) const;
  std::string name() const;
  static FeatureSampling parse(std::string_view text);  // "sqrt", "log2", "all" or an integer
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kRandomForest;
  std::string name;  // report label; defaults to the kind name
  int n_trees = 100;
  std::optional<int> max_depth;  // boosting falls back to 3
  int min_samples_leaf = 1;
  FeatureSampling features_per_split;
  double learning_rate = 0.1;
  double l2_penalty = 1.0;
  ClassWeight class_weight = ClassWeight::kNone;
  std::uint64_t seed = 0;

  std::string label() const { return name.empty() ? to_string(kind) : name; }
  bool tree_based() const { return kind != ClassifierKind::kLinear; }
  // Throws ConfigError on out-of-range fields.
  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
};

// Binary tree; a row goes left when row[feature] <= threshold.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  std::size_t split_count() const;
};

struct TrainedModel {
  ClassifierSpec spec;
  std::vector<FeatureKey> feature_keys;

  std::vector<Tree> trees;
  double base_score = 0.0;                  // boosting prior log-odds
  std::vector<double> impurity_decrease;    // per feature, averaged over trees

  std::vector<double> coefficients;         // linear, on standardized inputs
  double intercept = 0.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  int iterations = 0;

  std::string to_json() const;
};

struct ImportanceVector {
  std::vector<FeatureKey> feature_keys;
  std::vector<double> values;
};

// Deterministic in (spec, matrix). Throws DataError on single-class labels or
// an empty schema and ConfigError on an invalid spec.
TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& matrix);

// Positive-class probability per row. The schema must equal the model's.
std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& rows);
std::vector<double> predict_proba(const TrainedModel& model, std::span<const FeatureKey> schema,
                                  std::span<const double> row_major_values);

// Normalized mean impurity decrease; gini for forests, squared error for
// boosting stages. All zeros when no tree split.
ImportanceVector gini_importances(const TrainedModel& model);

}  // namespace aep
