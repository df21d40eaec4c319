#include "aep/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "aep/csv.hpp"
#include "aep/distributions.hpp"
#include "aep/errors.hpp"

namespace aep {
namespace {

// q_alpha for k = 2..20. k <= 10 as commonly tabulated for the Nemenyi test;
// larger k from the asymptotic studentized range, rounded to 3 decimals.
constexpr std::array<double, 19> kQ05 = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
                                         3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
constexpr std::array<double, 19> kQ10 = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
                                         3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319};

std::vector<double> row_ranks(const ScoreTable& t, std::size_t r, bool higher_is_better) {
  const std::size_t k = t.cols();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? t.at(r, a) > t.at(r, b) : t.at(r, a) < t.at(r, b);
  });
  std::vector<double> ranks(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j < k && t.at(r, order[j]) == t.at(r, order[i])) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t m = i; m < j; ++m) ranks[order[m]] = midrank;
    i = j;
  }
  return ranks;
}

}  // namespace

void ScoreTable::validate() const {
  if (rows() < 2 || cols() < 2) {
    throw DataError(fmt::format("score table must be at least 2 x 2, got {} x {}", rows(), cols()));
  }
  if (values.size() != rows() * cols()) throw DataError("score table is incomplete");
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      if (!std::isfinite(at(r, c))) {
        throw DataError(fmt::format("non-finite score at row '{}', column '{}'", row_labels[r], col_labels[c]));
      }
    }
  }
}

ScoreTable read_score_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("score table is empty");
  auto header = csv::split_line(csv::chomp(line));
  ScoreTable t;
  t.col_labels.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    auto view = csv::chomp(line);
    if (view.empty()) continue;
    auto fields = csv::split_line(view);
    const std::string& row_label = fields[0];
    for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
      const std::size_t i = c + 1;
      if (i >= fields.size() || fields[i].empty()) {
        throw DataError(fmt::format("missing cell at row '{}', column '{}'", row_label, t.col_labels[c]));
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
        throw DataError(fmt::format("unparseable cell '{}' at row '{}', column '{}'", fields[i], row_label,
                                    t.col_labels[c]));
      }
      t.values.push_back(v);
    }
    if (fields.size() > t.col_labels.size() + 1) {
      throw DataError(fmt::format("row '{}' has more cells than the header", row_label));
    }
    t.row_labels.push_back(row_label);
  }
  t.validate();
  return t;
}

std::vector<double> average_ranks(const ScoreTable& table, bool higher_is_better) {
  table.validate();
  std::vector<double> avg(table.cols(), 0.0);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto ranks = row_ranks(table, r, higher_is_better);
    for (std::size_t c = 0; c < table.cols(); ++c) avg[c] += ranks[c];
  }
  for (double& v : avg) v /= static_cast<double>(table.rows());
  return avg;
}

FriedmanResult friedman_test(const ScoreTable& table) {
  table.validate();
  const auto n = static_cast<double>(table.rows());
  const auto k = static_cast<double>(table.cols());

  FriedmanResult res;
  res.rank_sums.assign(table.cols(), 0.0);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto ranks = row_ranks(table, r, true);
    for (std::size_t c = 0; c < table.cols(); ++c) res.rank_sums[c] += ranks[c];
  }
  double sum_sq = 0.0;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    res.average_ranks.push_back(res.rank_sums[c] / n);
    sum_sq += res.rank_sums[c] * res.rank_sums[c];
  }
  res.chi_square = std::max(0.0, 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0));
  // Exact zero when every rank sum is equal; the closed form only cancels to within rounding.
  if (std::all_of(res.rank_sums.begin(), res.rank_sums.end(), [&](double s) { return s == res.rank_sums[0]; })) {
    res.chi_square = 0.0;
  }
  res.chi_square_df = k - 1.0;
  res.chi_square_p = dist::chi_square_sf(res.chi_square, res.chi_square_df);

  res.f_df1 = k - 1.0;
  res.f_df2 = (k - 1.0) * (n - 1.0);
  const double denom = n * (k - 1.0) - res.chi_square;
  if (denom <= 0.0) {
    // Every dataset ranks the treatments identically.
    res.iman_davenport_f = std::numeric_limits<double>::infinity();
    res.f_p = 0.0;
  } else {
    res.iman_davenport_f = (n - 1.0) * res.chi_square / denom;
    res.f_p = dist::f_sf(res.iman_davenport_f, res.f_df1, res.f_df2);
  }
  return res;
}

double nemenyi_q(double alpha, std::size_t k) {
  if (k < 2 || k > 20) throw ConfigError(fmt::format("Nemenyi q is tabulated for 2..20 treatments, got {}", k));
  if (alpha == 0.05) return kQ05[k - 2];
  if (alpha == 0.10) return kQ10[k - 2];
  throw ConfigError(fmt::format("Nemenyi q is tabulated for alpha 0.05 and 0.10, got {}", alpha));
}

NemenyiResult nemenyi(const ScoreTable& table, double alpha) {
  table.validate();
  const std::size_t k = table.cols();
  const auto n = static_cast<double>(table.rows());
  NemenyiResult res;
  res.alpha = alpha;
  res.q_alpha = nemenyi_q(alpha, k);
  const auto kd = static_cast<double>(k);
  res.critical_difference = res.q_alpha * std::sqrt(kd * (kd + 1.0) / (6.0 * n));
  res.average_ranks = average_ranks(table);
  res.rank_differences.assign(k * k, 0.0);
  res.significant.assign(k * k, false);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double diff = std::fabs(res.average_ranks[i] - res.average_ranks[j]);
      res.rank_differences[i * k + j] = diff;
      res.significant[i * k + j] = i != j && diff >= res.critical_difference;
    }
  }
  return res;
}

void write_friedman_csv(std::ostream& out, const ScoreTable& table, const FriedmanResult& r) {
  out << "metric,value\n";
  out << "datasets," << table.rows() << '\n';
  out << "treatments," << table.cols() << '\n';
  out << fmt::format("chi_square,{:.6f}\nchi_square_df,{}\nchi_square_p,{:.6e}\n", r.chi_square, r.chi_square_df,
                     r.chi_square_p);
  out << fmt::format("iman_davenport_f,{:.6f}\nf_df1,{}\nf_df2,{}\nf_p,{:.6e}\n", r.iman_davenport_f, r.f_df1,
                     r.f_df2, r.f_p);
  for (std::size_t c = 0; c < table.cols(); ++c) {
    out << "avg_rank:" << csv::escape(table.col_labels[c]) << ',' << fmt::format("{:.6f}", r.average_ranks[c])
        << '\n';
  }
}

void write_nemenyi_csv(std::ostream& out, const ScoreTable& table, const NemenyiResult& r) {
  out << "approach_a,approach_b,rank_difference,critical_difference,significant\n";
  for (std::size_t i = 0; i < table.cols(); ++i) {
    for (std::size_t j = i + 1; j < table.cols(); ++j) {
      out << csv::escape(table.col_labels[i]) << ',' << csv::escape(table.col_labels[j]) << ','
          << fmt::format("{:.6f},{:.6f}", r.difference(i, j), r.critical_difference) << ','
          << (r.differs(i, j) ? 1 : 0) << '\n';
    }
  }
}

void write_cd_diagram_csv(std::ostream& out, const ScoreTable& table, const NemenyiResult& r) {
  out << "approach,avg_rank,cd\n";
  for (std::size_t c = 0; c < table.cols(); ++c) {
    out << csv::escape(table.col_labels[c]) << ',' << fmt::format("{:.6f},{:.6f}", r.average_ranks[c],
                                                                  r.critical_difference)
        << '\n';
  }
}

}  // namespace aep
