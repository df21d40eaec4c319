#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace aep {

// Datasets (rows) x treatments (columns) of scores, e.g. mean AUC.
struct ScoreTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> values;  // row-major

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  // Throws DataError unless complete, finite and at least 2 x 2.
  void validate() const;
};

// First header cell is ignored (dataset column), the rest name treatments.
// Missing or unparseable cells raise DataError naming row and column.
ScoreTable read_score_table(std::istream& in);

// Within each row rank 1 = best, midranks for ties; averaged down the rows.
std::vector<double> average_ranks(const ScoreTable& table, bool higher_is_better = true);

struct FriedmanResult {
  std::vector<double> average_ranks;
  std::vector<double> rank_sums;
  double chi_square = 0.0;
  double chi_square_df = 0.0;
  double chi_square_p = 1.0;
  double iman_davenport_f = 0.0;
  double f_df1 = 0.0;
  double f_df2 = 0.0;
  double f_p = 1.0;
};

FriedmanResult friedman_test(const ScoreTable& table);

// Studentized range quantile divided by sqrt(2), for k in [2, 20] and
// alpha in {0.05, 0.10}. Throws ConfigError otherwise.
double nemenyi_q(double alpha, std::size_t k);

struct NemenyiResult {
  double alpha = 0.05;
  double q_alpha = 0.0;
  double critical_difference = 0.0;
  std::vector<double> average_ranks;
  std::vector<double> rank_differences;  // k x k, |R_i - R_j|
  std::vector<bool> significant;         // k x k

  bool differs(std::size_t i, std::size_t j) const { return significant[i * average_ranks.size() + j]; }
  double difference(std::size_t i, std::size_t j) const { return rank_differences[i * average_ranks.size() + j]; }
};

NemenyiResult nemenyi(const ScoreTable& table, double alpha);

// metric,value rows for the Friedman statistics.
void write_friedman_csv(std::ostream& out, const ScoreTable& table, const FriedmanResult& result);
// approach_a,approach_b,rank_difference,critical_difference,significant
void write_nemenyi_csv(std::ostream& out, const ScoreTable& table, const NemenyiResult& result);
// approach,avg_rank,cd  for critical-difference diagrams
void write_cd_diagram_csv(std::ostream& out, const ScoreTable& table, const NemenyiResult& result);

}  // namespace aep
