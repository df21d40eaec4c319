// aep: command-line front end for the aggregate / eliminate / predict workflow.
//
//   aep synth   --config synth.json --out DIR
//   aep run     --config run.json [--threads N] [--seed S] [--n-folds F] [--out DIR]
//   aep compare --table scores.csv [--alpha 0.05] [--out DIR]
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <fmt/format.h>

#include "aep/config.hpp"
#include "aep/errors.hpp"
#include "aep/parallel.hpp"
#include "aep/pipeline.hpp"
#include "aep/stats.hpp"
#include "aep/synth.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const aep::SynthConfig config = aep::load_synth_config(config_path);
  const aep::SynthOutput out = aep::generate(config);
  std::filesystem::create_directories(out_dir);
  write_text(std::filesystem::path(out_dir) / "events.csv", out.events_csv);
  write_text(std::filesystem::path(out_dir) / "manifest.json", out.manifest_json);
  std::cout << fmt::format("wrote {} patients ({} positive) to {}\n", config.n_patients, out.n_positive, out_dir);
  return 0;
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::size_t>& n_folds, const std::optional<std::string>& out_dir) {
  aep::RunConfig config = aep::load_run_config(config_path);
  if (seed) config.seed = *seed;
  if (n_folds) config.n_folds = *n_folds;
  if (out_dir) config.output_dir = *out_dir;

  const aep::RunResult result = aep::run_pipeline(config);
  for (const auto& w : result.warnings) std::cerr << fmt::format("warning: line {}: {}\n", w.line, w.message);
  std::cout << fmt::format("cohort: {} positive, {} negative; {} features\n", result.n_positive, result.n_negative,
                           result.n_features);
  if (result.report.rfe) {
    std::cout << fmt::format("elimination kept {} features ({})\n", *result.report.k,
                             aep::to_string(result.report.rfe->stop));
  }
  for (const auto& cell : result.report.cells) {
    std::cout << fmt::format("{:<10} {:<20} mean AUC {:.4f} (sd {:.4f})\n", cell.approach, cell.classifier,
                             cell.mean_auc, cell.sd_auc);
  }
  for (const auto& path : result.written) std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_compare(const std::string& table_path, double alpha, const std::optional<std::string>& out_dir) {
  std::ifstream in(table_path, std::ios::binary);
  if (!in) throw aep::DataError(fmt::format("cannot open score table '{}'", table_path));
  const aep::ScoreTable table = aep::read_score_table(in);
  const aep::FriedmanResult fr = aep::friedman_test(table);
  const aep::NemenyiResult nr = aep::nemenyi(table, alpha);

  std::cout << fmt::format("Friedman over {} datasets x {} approaches\n", table.rows(), table.cols());
  std::cout << fmt::format("  chi-square = {:.4f} (df {}), p = {:.4e}\n", fr.chi_square, fr.chi_square_df,
                           fr.chi_square_p);
  std::cout << fmt::format("  Iman-Davenport F = {:.4f} (df {}, {}), p = {:.4e}\n", fr.iman_davenport_f, fr.f_df1,
                           fr.f_df2, fr.f_p);
  std::cout << "average ranks:\n";
  for (std::size_t c = 0; c < table.cols(); ++c) {
    std::cout << fmt::format("  {:<12} {:.3f}\n", table.col_labels[c], fr.average_ranks[c]);
  }
  std::cout << fmt::format("Nemenyi alpha = {}, q = {:.3f}, CD = {:.4f}\n", alpha, nr.q_alpha, nr.critical_difference);
  for (std::size_t i = 0; i < table.cols(); ++i) {
    for (std::size_t j = i + 1; j < table.cols(); ++j) {
      if (nr.differs(i, j)) {
        std::cout << fmt::format("  {} vs {}: rank difference {:.3f} >= CD\n", table.col_labels[i],
                                 table.col_labels[j], nr.difference(i, j));
      }
    }
  }

  if (out_dir) {
    const std::filesystem::path dir(*out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / "friedman.csv", std::ios::binary);
    aep::write_friedman_csv(f, table, fr);
    std::ofstream n(dir / "nemenyi.csv", std::ios::binary);
    aep::write_nemenyi_csv(n, table, nr);
    std::ofstream cd(dir / "cd_diagram.csv", std::ios::binary);
    aep::write_cd_diagram_csv(cd, table, nr);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregate / eliminate / predict workflow for adverse drug event detection"};
  app.require_subcommand(1);
  app.fallthrough();

  std::size_t threads = 0;
  if (const char* env = std::getenv("AEP_THREADS")) {
    try {
      threads = static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "aep: AEP_THREADS must be a non-negative integer\n";
      return kExitUsage;
    }
  }
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores; default from AEP_THREADS)");

  std::string synth_config;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic event file with planted signal");
  synth->add_option("--config", synth_config, "Generator config (JSON)")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_folds;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run the full pipeline described by a run config");
  run->add_option("--config", run_config, "Run config (JSON)")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--n-folds", run_folds, "Override the number of folds");
  run->add_option("--out", run_out, "Override the output directory");

  std::string table_path;
  double alpha = 0.05;
  std::optional<std::string> compare_out;
  auto* compare = app.add_subcommand("compare", "Friedman and Nemenyi tests over a score table");
  compare->add_option("--table", table_path, "Score table CSV (datasets x approaches)")->required();
  compare->add_option("--alpha", alpha, "Nemenyi significance level (0.05 or 0.10)");
  compare->add_option("--out", compare_out, "Directory for result CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  aep::set_thread_count(threads);
  try {
    if (*synth) return cmd_synth(synth_config, synth_out);
    if (*run) return cmd_run(run_config, run_seed, run_folds, run_out);
    if (*compare) return cmd_compare(table_path, alpha, compare_out);
  } catch (const aep::ConfigError& e) {
    std::cerr << "aep: " << e.what() << '\n';
    return kExitUsage;
  } catch (const aep::DataError& e) {
    std::cerr << "aep: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "aep: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
