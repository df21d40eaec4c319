#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "aep/distributions.hpp"
#include "aep/errors.hpp"
#include "aep/stats.hpp"
#include "oracles.hpp"

using namespace aep;

namespace {

// Forest mean AUCs: five ADE datasets by seven approaches.
ScoreTable rf_scores() {
  ScoreTable t;
  t.row_labels = {"D61.1", "G62.0", "T78.4", "T80.8", "T88.7"};
  t.col_labels = {"L", "M", "D", "LM", "LD", "MD", "LMD"};
  t.values = {0.8583, 0.9226, 0.8871, 0.8965, 0.8867, 0.9311, 0.9172,  //
              0.8376, 0.7200, 0.8166, 0.8677, 0.8625, 0.8598, 0.8890,  //
              0.5939, 0.7081, 0.6032, 0.7250, 0.6591, 0.7307, 0.7616,  //
              0.8910, 0.8888, 0.8679, 0.9109, 0.9293, 0.9320, 0.9320,  //
              0.6533, 0.7308, 0.7029, 0.7832, 0.7399, 0.7652, 0.7873};
  return t;
}

ScoreTable table(std::size_t n, std::size_t k, std::vector<double> values) {
  ScoreTable t;
  for (std::size_t r = 0; r < n; ++r) t.row_labels.push_back("r" + std::to_string(r));
  for (std::size_t c = 0; c < k; ++c) t.col_labels.push_back("c" + std::to_string(c));
  t.values = std::move(values);
  return t;
}

std::size_t col(const ScoreTable& t, const std::string& name) {
  return static_cast<std::size_t>(std::find(t.col_labels.begin(), t.col_labels.end(), name) - t.col_labels.begin());
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("average ranks of the forest score fixture") {
  const ScoreTable t = rf_scores();
  const auto r = average_ranks(t);
  const std::vector<double> expect{6.2, 4.8, 6.0, 3.0, 4.2, 2.3, 1.5};
  for (std::size_t c = 0; c < 7; ++c) CHECK(r[c] == doctest::Approx(expect[c]).epsilon(1e-12));
}

TEST_CASE("average ranks of a table read from csv") {
  std::istringstream in(
      "ade,L,M,D,LM,LD,MD,LMD\n"
      "D61.1,0.8583,0.9226,0.8871,0.8965,0.8867,0.9311,0.9172\n"
      "G62.0,0.8376,0.7200,0.8166,0.8677,0.8625,0.8598,0.8890\n"
      "T78.4,0.5939,0.7081,0.6032,0.7250,0.6591,0.7307,0.7616\n"
      "T80.8,0.8910,0.8888,0.8679,0.9109,0.9293,0.9320,0.9320\n"
      "T88.7,0.6533,0.7308,0.7029,0.7832,0.7399,0.7652,0.7873\n");
  const ScoreTable t = read_score_table(in);
  CHECK(t.values == rf_scores().values);
  CHECK(t.col_labels == rf_scores().col_labels);
  CHECK(t.row_labels == rf_scores().row_labels);
}

TEST_CASE("dominant column and all-equal rows") {
  const ScoreTable dom = table(3, 3, {1, 0.5, 0.2, 0.9, 0.1, 0.3, 0.8, 0.7, 0.6});
  CHECK(average_ranks(dom)[0] == 1.0);
  const ScoreTable eq = table(2, 4, {0.5, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1, 0.1});
  for (double r : average_ranks(eq)) CHECK(r == 2.5);
  const auto low = average_ranks(dom, false);
  CHECK(low[0] == 3.0);
}

TEST_CASE("friedman statistics on the forest score fixture") {
  const FriedmanResult f = friedman_test(rf_scores());
  const std::vector<double> sums{31, 24, 30, 15, 21, 11.5, 7.5};
  CHECK(f.rank_sums == sums);
  // 12/(5*7*8) * sum R^2 - 3*5*8 from the hand rank sums.
  const double sum_sq = std::inner_product(sums.begin(), sums.end(), sums.begin(), 0.0);
  const double chi = 12.0 / 280.0 * sum_sq - 120.0;
  CHECK(f.chi_square == doctest::Approx(chi).epsilon(1e-12));
  CHECK(std::fabs(f.chi_square - 21.06) <= 0.01);
  CHECK(f.chi_square_df == 6.0);
  CHECK(std::fabs(f.iman_davenport_f - 9.43) <= 0.05);
  CHECK(f.iman_davenport_f == doctest::Approx(4.0 * chi / (30.0 - chi)).epsilon(1e-12));
  CHECK(f.f_df1 == 6.0);
  CHECK(f.f_df2 == 24.0);
  CHECK(f.f_p > 1e-5);
  CHECK(f.f_p < 1e-4);
  // Reference values from an independent statistics library.
  CHECK(rel_err(f.chi_square_p, 0.0017864542536025218) < 1e-10);
  CHECK(rel_err(f.f_p, 2.334807235073933e-05) < 1e-10);
}

TEST_CASE("identical columns carry no evidence") {
  const ScoreTable t = table(3, 4, {0.5, 0.5, 0.5, 0.5, 0.7, 0.7, 0.7, 0.7, 0.1, 0.1, 0.1, 0.1});
  const FriedmanResult f = friedman_test(t);
  CHECK(f.chi_square == 0.0);
  CHECK(f.chi_square_p == 1.0);
  CHECK(f.f_p == 1.0);
}

TEST_CASE("rank sums, permutations and monotone transforms") {
  std::mt19937 gen(17);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const std::size_t k = 2 + trial % 9;
    std::vector<double> v(n * k);
    for (auto& x : v) x = coarse(gen) / 5.0;
    const ScoreTable t = table(n, k, v);
    const FriedmanResult f = friedman_test(t);
    CHECK(std::accumulate(f.rank_sums.begin(), f.rank_sums.end(), 0.0) == n * k * (k + 1) / 2.0);

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    ScoreTable p = table(n, k, v);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) p.values[r * k + c] = t.at(r, perm[c]);
    }
    CHECK(friedman_test(p).chi_square == doctest::Approx(f.chi_square).epsilon(1e-12).scale(1.0));

    ScoreTable m = t;
    for (std::size_t r = 0; r < n; ++r) {
      const double scale = 1.0 + r;
      for (std::size_t c = 0; c < k; ++c) m.values[r * k + c] = std::exp(scale * t.at(r, c)) - 3.0;
    }
    CHECK(average_ranks(m) == average_ranks(t));
  }
}

TEST_CASE("two-column friedman is the sign statistic") {
  for (std::size_t n = 2; n <= 6; ++n) {
    for (unsigned pattern = 0; pattern < (1u << n); ++pattern) {
      std::vector<double> v;
      int plus = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const bool first_wins = (pattern >> r) & 1u;
        plus += first_wins ? 1 : 0;
        v.push_back(first_wins ? 0.9 : 0.1);
        v.push_back(first_wins ? 0.1 : 0.9);
      }
      const int minus = static_cast<int>(n) - plus;
      const double expect = static_cast<double>((plus - minus) * (plus - minus)) / static_cast<double>(n);
      CHECK(friedman_test(table(n, 2, v)).chi_square == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("critical difference on the forest score fixture") {
  const ScoreTable t = rf_scores();
  const NemenyiResult r = nemenyi(t, 0.05);
  CHECK(r.q_alpha == 2.949);
  CHECK(r.critical_difference == doctest::Approx(2.949 * std::sqrt(56.0 / 30.0)).epsilon(1e-12));
  CHECK(std::fabs(r.critical_difference - 4.03) <= 0.01);
  const auto lmd = col(t, "LMD");
  CHECK(r.differs(lmd, col(t, "L")));
  CHECK(r.differs(lmd, col(t, "D")));
  CHECK_FALSE(r.differs(lmd, col(t, "LD")));
  CHECK(r.difference(lmd, col(t, "LD")) == doctest::Approx(2.7));
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK_FALSE(r.differs(i, i));
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK(r.differs(i, j) == (r.difference(i, j) >= r.critical_difference));
      CHECK(r.differs(i, j) == r.differs(j, i));
    }
  }
}

TEST_CASE("nemenyi constants") {
  // Studentized range quantiles over sqrt(2), infinite df.
  const std::vector<double> q05{1.9600, 2.3437, 2.5690, 2.7278, 2.8497, 2.9483, 3.0309, 3.1017, 3.1637, 3.2187,
                                3.2680, 3.3127, 3.3536, 3.3912, 3.4260, 3.4584, 3.4887, 3.5171, 3.5438};
  const std::vector<double> q10{1.6449, 2.0523, 2.2913, 2.4595, 2.5885, 2.6927, 2.7799, 2.8546, 2.9199, 2.9778,
                                3.0297, 3.0767, 3.1197, 3.1592, 3.1957, 3.2297, 3.2615, 3.2912, 3.3192};
  for (std::size_t k = 2; k <= 20; ++k) {
    CHECK(std::fabs(nemenyi_q(0.05, k) - q05[k - 2]) <= 1.5e-3);
    CHECK(std::fabs(nemenyi_q(0.10, k) - q10[k - 2]) <= 1.5e-3);
  }
  CHECK_THROWS_AS(nemenyi_q(0.01, 5), ConfigError);
  CHECK_THROWS_AS(nemenyi_q(0.05, 21), ConfigError);
  CHECK_THROWS_AS(nemenyi_q(0.05, 1), ConfigError);
}

TEST_CASE("equal average ranks are never significant") {
  const ScoreTable t = table(2, 3, {0.9, 0.1, 0.5, 0.1, 0.9, 0.5});
  const NemenyiResult r = nemenyi(t, 0.10);
  CHECK(r.average_ranks[0] == r.average_ranks[1]);
  CHECK_FALSE(r.differs(0, 1));
}

TEST_CASE("score table validation") {
  std::istringstream missing("ade,A,B\nx,0.5,\ny,0.1,0.2\n");
  try {
    read_score_table(missing);
    FAIL("expected missing cell error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'x'") != std::string::npos);
    CHECK(msg.find("'B'") != std::string::npos);
  }
  std::istringstream short_row("ade,A,B\nx,0.5\ny,0.1,0.2\n");
  CHECK_THROWS_AS(read_score_table(short_row), DataError);
  std::istringstream one_row("ade,A,B\nx,0.5,0.4\n");
  CHECK_THROWS_AS(read_score_table(one_row), DataError);
  CHECK_THROWS_AS(friedman_test(table(2, 1, {0.1, 0.2})), DataError);
  ScoreTable nan = table(2, 2, {0.1, 0.2, std::nan(""), 0.3});
  CHECK_THROWS_AS(friedman_test(nan), DataError);
}

TEST_CASE("output files") {
  const ScoreTable t = rf_scores();
  const FriedmanResult f = friedman_test(t);
  const NemenyiResult n = nemenyi(t, 0.05);
  std::ostringstream cd;
  write_cd_diagram_csv(cd, t, n);
  std::istringstream lines(cd.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "approach,avg_rank,cd");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 7);
  std::ostringstream fr;
  write_friedman_csv(fr, t, f);
  CHECK(fr.str().rfind("metric,value\n", 0) == 0);
  std::ostringstream ne;
  write_nemenyi_csv(ne, t, n);
  CHECK(ne.str().find("L,LMD") != std::string::npos);
}

TEST_CASE("tail functions against numerical integration") {
  for (double df : {1.0, 2.0, 3.0, 6.0, 10.0, 25.0}) {
    for (double x : {0.5, 1.0, 3.5, 8.0, 21.0642857, 40.0, 90.0}) {
      const double expect = oracle::chi_square_sf_quadrature(x, df);
      CAPTURE(df);
      CAPTURE(x);
      CHECK(rel_err(dist::chi_square_sf(x, df), expect) <= 1e-10);
    }
  }
  for (double d1 : {1.0, 2.0, 3.0, 6.0, 10.0}) {
    for (double d2 : {2.0, 4.0, 12.0, 24.0, 60.0}) {
      for (double x : {0.3, 1.0, 2.5, 9.43, 30.0}) {
        const double expect = oracle::f_sf_quadrature(x, d1, d2);
        CAPTURE(d1);
        CAPTURE(d2);
        CAPTURE(x);
        CHECK(rel_err(dist::f_sf(x, d1, d2), expect) <= 1e-10);
      }
    }
  }
}

TEST_CASE("tail function reference values and edges") {
  CHECK(rel_err(dist::chi_square_sf(3.5, 2), 0.1737739434504451) < 1e-12);
  CHECK(rel_err(dist::chi_square_sf(40, 10), 1.694474393006737e-05) < 1e-10);
  CHECK(rel_err(dist::f_sf(2.5, 3, 12), 0.10915471239500632) < 1e-10);
  CHECK(rel_err(dist::f_sf(0.3, 1, 4), 0.6130111132661794) < 1e-10);
  // df = 2 has the closed form exp(-x/2).
  for (double x : {0.1, 1.0, 7.0, 30.0}) CHECK(rel_err(dist::chi_square_sf(x, 2), std::exp(-x / 2)) < 1e-13);
  CHECK(dist::chi_square_sf(0.0, 4) == 1.0);
  CHECK(dist::f_sf(0.0, 3, 5) == 1.0);
  CHECK(dist::gamma_p(2.0, 3.0) + dist::gamma_q(2.0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dist::beta_inc(2.0, 3.0, 0.4) + dist::beta_inc(3.0, 2.0, 0.6) == doctest::Approx(1.0).epsilon(1e-14));
}
