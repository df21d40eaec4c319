#include "aep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "aep/csv.hpp"
#include "aep/errors.hpp"
#include "aep/parallel.hpp"
#include "aep/random.hpp"

namespace aep {

std::vector<std::size_t> FoldAssignment::rows_in(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
    if (fold_of_row[r] == fold) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
    if (fold_of_row[r] != fold) out.push_back(r);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("n_folds must be >= 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t r = 0; r < labels.size(); ++r) (labels[r] == 1 ? pos : neg).push_back(r);
  if (pos.size() < n_folds || neg.size() < n_folds) {
    throw DataError(fmt::format("stratified {}-fold split needs >= {} rows per class, got {} positive and {} negative",
                                n_folds, n_folds, pos.size(), neg.size()));
  }

  Rng rng(seed);
  rng.shuffle(std::span(pos));
  rng.shuffle(std::span(neg));

  FoldAssignment out;
  out.n_folds = n_folds;
  out.seed = seed;
  out.fold_of_row.assign(labels.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) out.fold_of_row[pos[i]] = i % n_folds;
  // Negatives continue the deal where positives stopped, which evens out fold sizes.
  const std::size_t offset = pos.size() % n_folds;
  for (std::size_t i = 0; i < neg.size(); ++i) out.fold_of_row[neg[i]] = (offset + i) % n_folds;
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double n_pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        rank_sum += midrank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("auc: both classes must be present");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<double> cross_validate(const FeatureMatrix& matrix, const ClassifierSpec& spec,
                                   const FoldAssignment& folds) {
  if (folds.fold_of_row.size() != matrix.rows()) throw DataError("fold assignment does not match matrix rows");
  std::vector<double> out(folds.n_folds, 0.0);
  parallel_for(folds.n_folds, [&](std::size_t f) {
    const auto test_rows = folds.rows_in(f);
    const auto train_rows = folds.rows_not_in(f);
    const FeatureMatrix train_m = matrix.select_rows(train_rows);
    const FeatureMatrix test_m = matrix.select_rows(test_rows);
    const auto pos = test_m.positives();
    if (pos == 0 || pos == test_m.rows()) throw DataError(fmt::format("fold {} holds a single class", f));
    ClassifierSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, f);
    const TrainedModel model = train(fold_spec, train_m);
    out[f] = auc(predict_proba(model, test_m), test_m.labels);
  });
  return out;
}

const CellResult* EvaluationReport::find(std::string_view approach, std::string_view classifier) const {
  for (const auto& c : cells) {
    if (c.approach == approach && c.classifier == classifier) return &c;
  }
  return nullptr;
}

EvaluationReport results_grid(const FeatureMatrix& matrix, std::span<const IntegrationApproach> approaches,
                              std::span<const ClassifierSpec> specs, const GridOptions& options) {
  if (approaches.empty() || specs.empty()) throw ConfigError("results grid needs approaches and classifiers");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (specs[i].label() == specs[j].label()) {
        throw ConfigError(fmt::format("duplicate classifier name '{}'", specs[i].label()));
      }
    }
  }
  const bool wants_kbest = std::any_of(approaches.begin(), approaches.end(), [](const auto& a) { return a.kbest; });
  std::optional<ClassifierSpec> rfe_spec = options.rfe_spec;
  if (wants_kbest) {
    if (!options.rfe) throw ConfigError("LMD-kbest requires an rfe configuration");
    if (!rfe_spec) {
      for (const auto& s : specs) {
        if (s.tree_based()) {
          rfe_spec = s;
          break;
        }
      }
    }
    if (!rfe_spec) rfe_spec = ClassifierSpec{};
    options.rfe->validate();
  }

  EvaluationReport report;
  report.ade = options.ade;
  report.seed = options.seed;
  report.n_folds = options.n_folds;
  report.window_length = matrix.window_length;

  const FoldAssignment folds = stratified_kfold(matrix.labels, options.n_folds, options.seed);

  if (wants_kbest) {
    const IntegrationApproach all{true, true, true, false};
    const FeatureMatrix full = project(matrix, all);
    const auto train_rows = folds.rows_not_in(0);
    report.rfe = run_rfe(full.select_rows(train_rows), *rfe_spec, *options.rfe);
    report.k = report.rfe->selected.size();
  }

  for (const auto& approach : approaches) {
    FeatureMatrix view;
    if (approach.kbest) {
      const FeatureMatrix full = project(matrix, IntegrationApproach{true, true, true, false});
      std::vector<std::size_t> keep;
      for (const auto& key : report.rfe->selected) keep.push_back(*full.column_index(key));
      view = full.select_columns(keep);
    } else {
      view = project(matrix, approach);
    }
    for (const auto& spec : specs) {
      CellResult cell;
      cell.approach = approach.name();
      cell.classifier = spec.label();
      cell.n_features = view.cols();
      if (view.cols() == 0) {
        throw DataError(fmt::format("approach {} has no feature columns in this dataset", approach.name()));
      }
      ClassifierSpec cell_spec = spec;
      cell_spec.seed = derive_seed(options.seed, stable_hash(cell.approach), stable_hash(cell.classifier), spec.seed);
      cell.fold_aucs = cross_validate(view, cell_spec, folds);
      const auto n = static_cast<double>(cell.fold_aucs.size());
      cell.mean_auc = std::accumulate(cell.fold_aucs.begin(), cell.fold_aucs.end(), 0.0) / n;
      double ss = 0.0;
      for (double a : cell.fold_aucs) ss += (a - cell.mean_auc) * (a - cell.mean_auc);
      cell.sd_auc = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_fold_csv(std::ostream& out, const EvaluationReport& report) {
  out << "ade,approach,classifier,fold,auc\n";
  for (const auto& cell : report.cells) {
    for (std::size_t f = 0; f < cell.fold_aucs.size(); ++f) {
      out << csv::escape(report.ade) << ',' << cell.approach << ',' << csv::escape(cell.classifier) << ',' << f
          << ',' << fmt::format("{:.6f}", cell.fold_aucs[f]) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const EvaluationReport& report) {
  out << "ade,approach,classifier,n_features,mean_auc,sd_auc\n";
  for (const auto& cell : report.cells) {
    out << csv::escape(report.ade) << ',' << cell.approach << ',' << csv::escape(cell.classifier) << ','
        << cell.n_features << ',' << fmt::format("{:.6f},{:.6f}", cell.mean_auc, cell.sd_auc) << '\n';
  }
}

}  // namespace aep
