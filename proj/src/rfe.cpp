#include "aep/rfe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "aep/csv.hpp"
#include "aep/errors.hpp"
#include "aep/eval.hpp"
#include "aep/random.hpp"

namespace aep {
namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

Split stratified_holdout(std::span<const int> labels, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r] == 1 ? 1 : 0].push_back(r);
  Rng rng(seed);
  Split split;
  for (auto& members : by_class) {
    if (members.size() < 2) throw DataError("elimination needs at least two rows of each class");
    rng.shuffle(std::span(members));
    auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
    split.validation.insert(split.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

struct Fit {
  double val_auc = 0.0;
  ImportanceVector importances;
};

Fit fit_and_score(const FeatureMatrix& train_m, const FeatureMatrix& val_m, std::span<const std::size_t> columns,
                  const ClassifierSpec& spec) {
  const TrainedModel model = train(spec, train_m.select_columns(columns));
  const FeatureMatrix val = val_m.select_columns(columns);
  return {auc(predict_proba(model, val), val.labels), gini_importances(model)};
}

}  // namespace

EliminationRule parse_elimination_rule(std::string_view name) {
  if (name == "eliminate_least_important") return EliminationRule::kEliminateLeastImportant;
  if (name == "paper_literal") return EliminationRule::kStrongestAboveAlpha;
  throw ConfigError(fmt::format("unknown elimination rule '{}'", name));
}

const char* to_string(EliminationRule rule) {
  return rule == EliminationRule::kEliminateLeastImportant ? "eliminate_least_important" : "paper_literal";
}

const char* to_string(RfeStop stop) {
  switch (stop) {
    case RfeStop::kReachedK:
      return "reached_k";
    case RfeStop::kAucDrop:
      return "auc_drop";
    case RfeStop::kNoCandidates:
      return "no_candidates";
  }
  return "?";
}

void RfeConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("rfe alpha must lie in [0, 1]");
  if (!(beta >= 0.0)) throw ConfigError("rfe beta must be >= 0");
  if (k < 1) throw ConfigError("rfe k must be >= 1");
  if (step < 1) throw ConfigError("rfe step must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("rfe validation_fraction must lie in (0, 1)");
  }
}

RfeResult run_rfe(const FeatureMatrix& matrix, const ClassifierSpec& spec, const RfeConfig& config) {
  config.validate();
  if (!spec.tree_based()) throw ConfigError("recursive elimination needs a tree-based classifier");
  if (config.k >= matrix.cols()) {
    throw ConfigError(fmt::format("rfe k={} must be smaller than the column count {}", config.k, matrix.cols()));
  }

  const Split split = stratified_holdout(matrix.labels, config.validation_fraction, config.seed);
  const FeatureMatrix train_m = matrix.select_rows(split.train);
  const FeatureMatrix val_m = matrix.select_rows(split.validation);

  std::vector<std::size_t> current(matrix.cols());
  std::iota(current.begin(), current.end(), 0);

  RfeResult result;
  Fit fit = fit_and_score(train_m, val_m, current, spec);
  result.trace.push_back({0, {}, current.size(), fit.val_auc});
  double best_auc = fit.val_auc;

  while (current.size() > config.k) {
    const std::size_t budget = std::min(config.step, current.size() - config.k);
    // Positions into `current`, ordered by removal priority.
    std::vector<std::size_t> order(current.size());
    std::iota(order.begin(), order.end(), 0);
    const auto& imp = fit.importances.values;
    if (config.rule == EliminationRule::kEliminateLeastImportant) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] < imp[b]; });
    } else {
      std::erase_if(order, [&](std::size_t i) { return !(imp[i] > config.alpha); });
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
    }
    if (order.empty()) {
      result.stop = RfeStop::kNoCandidates;
      break;
    }
    order.resize(std::min(order.size(), budget));

    std::vector<bool> drop(current.size(), false);
    for (std::size_t i : order) drop[i] = true;
    std::vector<std::size_t> next;
    std::vector<FeatureKey> removed;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (drop[i]) {
        removed.push_back(matrix.feature_keys[current[i]]);
      } else {
        next.push_back(current[i]);
      }
    }

    Fit candidate = fit_and_score(train_m, val_m, next, spec);
    if (best_auc - candidate.val_auc > config.beta) {
      result.stop = RfeStop::kAucDrop;
      break;
    }
    best_auc = std::max(best_auc, candidate.val_auc);
    current = std::move(next);
    fit = std::move(candidate);
    result.trace.push_back({result.trace.size(), std::move(removed), current.size(), fit.val_auc});
  }
  if (current.size() == config.k) result.stop = RfeStop::kReachedK;

  for (std::size_t c : current) result.selected.push_back(matrix.feature_keys[c]);
  result.final_importances = std::move(fit.importances);
  return result;
}

void write_trace_csv(std::ostream& out, const RfeResult& result) {
  out << "iteration,removed,remaining,val_auc\n";
  for (const auto& it : result.trace) {
    std::string removed;
    for (const auto& key : it.removed) {
      if (!removed.empty()) removed += ';';
      removed += key.name();
    }
    out << it.iteration << ',' << csv::escape(removed) << ',' << it.remaining << ','
        << fmt::format("{:.6f}", it.val_auc) << '\n';
  }
}

}  // namespace aep
