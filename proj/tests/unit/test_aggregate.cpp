#include <doctest.h>

#include <random>
#include <sstream>

#include "aep/aggregate.hpp"
#include "aep/errors.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace aep;
using aep::testing::diag;
using aep::testing::drug;
using aep::testing::lab;

namespace {

std::vector<LabPoint> points(std::vector<Day> t, std::vector<double> v) {
  std::vector<LabPoint> out;
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back({t[i], v[i]});
  return out;
}

Cohort two_member_cohort() {
  Cohort c;
  c.target_code = "T";
  c.window_length_days = 10;
  c.members.push_back({{"A", {diag("x", 1)}}, Label::kPositive, {0, 10}});
  c.members.push_back({{"B", {drug("y", 1), drug("y", 2), drug("y", 3)}}, Label::kNegative, {0, 10}});
  return c;
}

FeatureMatrix mixed_matrix() {
  FeatureMatrix m;
  m.feature_keys = {{Source::kLab, "L1"}, {Source::kLab, "L2"}, {Source::kMedication, "M1"},
                    {Source::kDiagnosis, "D1"}, {Source::kDiagnosis, "D2"}};
  m.labels = {1, 0};
  m.patient_ids = {"a", "b"};
  m.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return m;
}

}  // namespace

TEST_CASE("categorical counts") {
  const std::vector<Event> ev{drug("A", 1), drug("B", 2), drug("A", 3)};
  const auto counts = count_categorical(ev, Source::kMedication);
  REQUIRE(counts.size() == 2);
  CHECK(counts.at({Source::kMedication, "A"}) == 2.0);
  CHECK(counts.at({Source::kMedication, "B"}) == 1.0);
  CHECK(count_categorical({}, Source::kDiagnosis).empty());
  CHECK(count_categorical(ev, Source::kDiagnosis).empty());
}

TEST_CASE("lab trend examples") {
  CHECK(*lr_transform(points({0, 1, 2}, {1, 3, 5})) == doctest::Approx(2.0));
  CHECK(*lr_transform(points({5}, {7})) == 0.0);
  CHECK(*lr_transform(points({4, 4}, {1, 9})) == 0.0);
  CHECK_FALSE(lr_transform({}).has_value());
}

TEST_CASE("lab trend matches closed-form least squares") {
  std::mt19937 gen(3);
  std::uniform_int_distribution<int> day(-200, 200);
  std::normal_distribution<double> val(5.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 12;
    std::vector<LabPoint> pts;
    std::vector<double> t;
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
      pts.push_back({day(gen), val(gen)});
      t.push_back(pts.back().timestamp);
      v.push_back(pts.back().value);
    }
    bool distinct = false;
    for (double x : t) distinct = distinct || x != t[0];
    if (!distinct) continue;
    const double expect = oracle::ols_slope(t, v);
    CHECK(*lr_transform(pts) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("lab trend is translation invariant and scales linearly") {
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> day(0, 90);
  std::normal_distribution<double> val(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabPoint> pts;
    for (int i = 0; i < 2 + trial % 6; ++i) pts.push_back({day(gen), val(gen)});
    const double base = *lr_transform(pts);
    const double c = val(gen) * 10.0;
    const double a = val(gen);
    auto shifted = pts;
    auto scaled = pts;
    for (auto& p : shifted) p.value += c;
    for (auto& p : scaled) p.value *= a;
    CHECK(*lr_transform(shifted) == doctest::Approx(base).epsilon(1e-9).scale(1.0));
    CHECK(*lr_transform(scaled) == doctest::Approx(a * base).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("other lab summaries") {
  const auto pts = points({0, 5, 9}, {2.0, 4.0, 9.0});
  CHECK(*summarize_lab(pts, LabTransform::kLastValue) == 9.0);
  CHECK(*summarize_lab(pts, LabTransform::kMean) == doctest::Approx(5.0));
  CHECK_FALSE(summarize_lab({}, LabTransform::kMean));
  CHECK(parse_lab_transform("last_value") == LabTransform::kLastValue);
  CHECK_THROWS_AS(parse_lab_transform("median"), ConfigError);
}

TEST_CASE("one record aggregates all three sources and drops the target") {
  PatientRecord r{"P",
                  {diag("Z51.1", 1), lab("NPU03568", 10.0, 2), drug("A04AA01", 3), diag("Z51.1", 4),
                   lab("NPU03568", 6.0, 4), diag("T", 5), diag("Z51.1", 50)}};
  const auto f = aggregate_record(r, {0, 10}, "T");
  REQUIRE(f.size() == 3);
  CHECK(f.at({Source::kDiagnosis, "Z51.1"}) == 2.0);
  CHECK(f.at({Source::kMedication, "A04AA01"}) == 1.0);
  CHECK(f.at({Source::kLab, "NPU03568"}) == doctest::Approx(-2.0));
  CHECK(aggregate_record(r, {100, 200}, "T").empty());
}

TEST_CASE("matrix is the union of keys in canonical order with zeros") {
  const FeatureMatrix m = build_matrix(two_member_cohort());
  REQUIRE(m.cols() == 2);
  CHECK(m.feature_keys[0].name() == "M:y");
  CHECK(m.feature_keys[1].name() == "D:x");
  REQUIRE(m.rows() == 2);
  CHECK(m.patient_ids[0] == "A");
  CHECK(m.at(0, 0) == 0.0);
  CHECK(m.at(0, 1) == 1.0);
  CHECK(m.at(1, 0) == 3.0);
  CHECK(m.at(1, 1) == 0.0);
  CHECK(m.labels == std::vector<int>{1, 0});
  CHECK(m.window_length == 10);
}

TEST_CASE("no in-window events gives zero columns") {
  Cohort c = two_member_cohort();
  for (auto& m : c.members) m.window = {100, 110};
  const FeatureMatrix m = build_matrix(c);
  CHECK(m.cols() == 0);
  CHECK(m.rows() == 2);
}

TEST_CASE("single-class cohort cannot become a matrix") {
  Cohort c = two_member_cohort();
  c.members.pop_back();
  CHECK_THROWS_AS(build_matrix(c), DataError);
}

TEST_CASE("synthetic matrix has finite values and no target column") {
  SynthConfig cfg = canonical_synth_config(2);
  cfg.n_patients = 120;
  const FeatureMatrix m = testing::synth_matrix(cfg);
  CHECK(m.rows() == 120);
  for (double v : m.values) CHECK(std::isfinite(v));
  for (const auto& k : m.feature_keys) CHECK(k.code != cfg.target_code);
  CHECK(std::is_sorted(m.feature_keys.begin(), m.feature_keys.end()));
}

TEST_CASE("projection keeps the requested sources") {
  const FeatureMatrix m = mixed_matrix();
  const auto l = project(m, IntegrationApproach::parse("L"));
  REQUIRE(l.cols() == 2);
  CHECK(l.at(1, 1) == 7.0);
  const auto md = project(m, IntegrationApproach::parse("MD"));
  REQUIRE(md.cols() == 3);
  CHECK(md.feature_keys[0].name() == "M:M1");
  CHECK(md.at(0, 2) == 5.0);
  const auto all = project(m, IntegrationApproach::parse("LMD"));
  CHECK(all.values == m.values);
  CHECK(all.feature_keys == m.feature_keys);
  CHECK_THROWS_AS(project(m, IntegrationApproach::parse("LMD-kbest")), ConfigError);

  const auto no_labs = project(m, IntegrationApproach::parse("MD"));
  const auto empty = project(no_labs, IntegrationApproach::parse("L"));
  CHECK(empty.cols() == 0);
  CHECK(empty.rows() == 2);
}

TEST_CASE("projection composes as set intersection") {
  const FeatureMatrix m = mixed_matrix();
  const auto approaches = IntegrationApproach::canonical();
  for (const auto& a : approaches) {
    if (a.kbest) continue;
    for (const auto& b : approaches) {
      if (b.kbest) continue;
      IntegrationApproach both{a.lab && b.lab, a.medication && b.medication, a.diagnosis && b.diagnosis, false};
      const auto first = project(m, a);
      bool any = false;
      for (const auto& k : first.feature_keys) any = any || b.includes(k.source);
      if (!both.lab && !both.medication && !both.diagnosis) continue;
      if (!any) continue;
      const auto twice = project(first, b);
      const auto direct = project(m, both);
      CHECK(twice.feature_keys == direct.feature_keys);
      CHECK(twice.values == direct.values);
    }
  }
}

TEST_CASE("approach names") {
  const auto all = IntegrationApproach::canonical();
  REQUIRE(all.size() == 8);
  std::vector<std::string> names;
  for (const auto& a : all) names.push_back(a.name());
  CHECK(names == std::vector<std::string>{"L", "M", "D", "LM", "LD", "MD", "LMD", "LMD-kbest"});
  for (const auto& a : all) CHECK(IntegrationApproach::parse(a.name()) == a);
  CHECK_THROWS_AS(IntegrationApproach::parse("X"), ConfigError);
  CHECK(FeatureKey::parse("D:K00.0") == FeatureKey{Source::kDiagnosis, "K00.0"});
}

TEST_CASE("matrix csv round trip") {
  SynthConfig cfg = canonical_synth_config(9);
  cfg.n_patients = 60;
  const FeatureMatrix m = testing::synth_matrix(cfg);
  std::stringstream buf;
  write_matrix_csv(buf, m);
  const FeatureMatrix back = read_matrix_csv(buf);
  CHECK(back.feature_keys == m.feature_keys);
  CHECK(back.values == m.values);
  CHECK(back.labels == m.labels);
  CHECK(back.patient_ids == m.patient_ids);
}
