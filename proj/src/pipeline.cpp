#include "aep/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "aep/csv.hpp"
#include "aep/errors.hpp"

namespace aep {
namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", name, e.what()));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", name, e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", name, e.what()));
  }
}

ImportanceVector sorted_descending(const ImportanceVector& in) {
  std::vector<std::size_t> order(in.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (in.values[a] != in.values[b]) return in.values[a] > in.values[b];
    return in.feature_keys[a].name() < in.feature_keys[b].name();
  });
  ImportanceVector out;
  for (std::size_t i : order) {
    out.feature_keys.push_back(in.feature_keys[i]);
    out.values.push_back(in.values[i]);
  }
  return out;
}

template <typename Writer>
std::filesystem::path write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  writer(out);
  if (!out) throw std::runtime_error(fmt::format("error while writing '{}'", path.string()));
  return path;
}

}  // namespace

void write_importance_csv(std::ostream& out, const ImportanceVector& importances) {
  const auto sorted = sorted_descending(importances);
  out << "feature,importance\n";
  for (std::size_t i = 0; i < sorted.values.size(); ++i) {
    out << csv::escape(sorted.feature_keys[i].name()) << ',' << fmt::format("{:.8f}", sorted.values[i]) << '\n';
  }
}

RunResult run_pipeline(const RunConfig& config) {
  RunResult result;

  const ParsedEvents parsed = stage("ingest", [&] {
    std::ifstream in(config.events, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open events file '{}'", config.events.string()));
    return parse_events(in, config.format);
  });
  result.warnings = parsed.warnings;
  const Cohort cohort = stage("cohort", [&] { return build_cohort(parsed.records, config.cohort); });
  result.n_positive = cohort.positives();
  result.n_negative = cohort.negatives();

  const FeatureMatrix matrix = stage("aggregate", [&] { return build_matrix(cohort, config.lab_transform); });
  result.n_features = matrix.cols();

  GridOptions options;
  options.ade = config.ade;
  options.n_folds = config.n_folds;
  options.seed = config.seed;
  options.rfe = config.rfe;
  result.report = stage("evaluate", [&] {
    return results_grid(matrix, config.approaches, config.classifiers, options);
  });

  // Importances of a forest refit on all rows, restricted to the selected
  // features when elimination ran.
  result.importances = stage("importance", [&] {
    ClassifierSpec forest;
    for (const auto& s : config.classifiers) {
      if (s.kind == ClassifierKind::kRandomForest) {
        forest = s;
        break;
      }
    }
    FeatureMatrix view = project(matrix, IntegrationApproach{true, true, true, false});
    if (result.report.rfe) {
      std::vector<std::size_t> keep;
      for (const auto& key : result.report.rfe->selected) keep.push_back(*view.column_index(key));
      view = view.select_columns(keep);
    }
    return sorted_descending(gini_importances(train(forest, view)));
  });

  stage("report", [&] {
    std::filesystem::create_directories(config.output_dir);
    const auto& dir = config.output_dir;
    result.written.push_back(write_file(dir / "matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, matrix); }));
    result.written.push_back(
        write_file(dir / "folds.csv", [&](std::ostream& o) { write_fold_csv(o, result.report); }));
    result.written.push_back(
        write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result.report); }));
    if (result.report.rfe) {
      result.written.push_back(
          write_file(dir / "rfe_trace.csv", [&](std::ostream& o) { write_trace_csv(o, *result.report.rfe); }));
    }
    result.written.push_back(write_file(dir / "importances.csv", [&](std::ostream& o) {
      write_importance_csv(o, result.importances);
    }));
    result.written.push_back(write_file(dir / "run_info.json", [&](std::ostream& o) {
      nlohmann::ordered_json info;
      info["ade"] = result.report.ade;
      info["seed"] = result.report.seed;
      info["n_folds"] = result.report.n_folds;
      info["window_length_days"] = result.report.window_length;
      info["positives"] = result.n_positive;
      info["negatives"] = result.n_negative;
      info["features"] = result.n_features;
      info["parse_warnings"] = result.warnings.size();
      if (result.report.rfe) {
        info["k"] = *result.report.k;
        info["rfe_stop"] = to_string(result.report.rfe->stop);
        info["rfe_scope"] =
            "selection computed once on the training rows of fold 0 and reused for every fold and classifier; "
            "LMD-kbest cells may be optimistically biased";
      }
      o << info.dump(2) << '\n';
    }));
    return 0;
  });
  return result;
}

}  // namespace aep
