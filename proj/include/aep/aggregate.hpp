#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aep/ehr.hpp"

namespace aep {

// Feature source. Declaration order is the canonical column order.
enum class Source : std::uint8_t { kLab = 0, kMedication = 1, kDiagnosis = 2 };

char source_letter(Source s);

struct FeatureKey {
  Source source = Source::kLab;
  std::string code;

  // "<L|M|D>:<code>"
  std::string name() const;
  static FeatureKey parse(std::string_view name);

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
};

using FeatureMap = std::map<FeatureKey, double>;

// Dense patients x features table with row-aligned labels.
struct FeatureMatrix {
  std::vector<FeatureKey> feature_keys;
  std::vector<double> values;  // row-major, rows() * cols()
  std::vector<int> labels;     // 0 or 1
  std::vector<std::string> patient_ids;
  int window_length = 0;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_keys.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }

  std::size_t positives() const;
  std::optional<std::size_t> column_index(const FeatureKey& key) const;

  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
};

// Which scalar summarizes an in-window lab series.
enum class LabTransform { kSlope, kLastValue, kMean };

LabTransform parse_lab_transform(std::string_view name);
const char* to_string(LabTransform t);

// Occurrence count per distinct code of the given categorical source.
FeatureMap count_categorical(std::span<const Event> events, Source source);

struct LabPoint {
  Day timestamp;
  double value;
};

// Least-squares slope of value against day. A single point or a series with
// one distinct timestamp yields 0; an empty series yields nullopt.
std::optional<double> lr_transform(std::span<const LabPoint> points);

std::optional<double> summarize_lab(std::span<const LabPoint> points, LabTransform transform);

FeatureMap aggregate_record(const PatientRecord& record, const Window& window, std::string_view target_code,
                            LabTransform transform = LabTransform::kSlope);

// Union of member features in canonical order; absent entries become 0.
FeatureMatrix build_matrix(const Cohort& cohort, LabTransform transform = LabTransform::kSlope);

// One of the eight canonical source combinations.
struct IntegrationApproach {
  bool lab = false;
  bool medication = false;
  bool diagnosis = false;
  bool kbest = false;  // top-k selection on the full set

  bool includes(Source s) const;
  std::string name() const;
  static IntegrationApproach parse(std::string_view name);
  static std::vector<IntegrationApproach> canonical();

  friend bool operator==(const IntegrationApproach&, const IntegrationApproach&) = default;
};

// Keeps the columns whose source belongs to the approach. Throws ConfigError
// for LMD-kbest, which is produced by recursive elimination instead.
FeatureMatrix project(const FeatureMatrix& matrix, const IntegrationApproach& approach);

// Header: patient_id,label,<feature names...>
void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix);
FeatureMatrix read_matrix_csv(std::istream& in);

}  // namespace aep
