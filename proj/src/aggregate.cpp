#include "aep/aggregate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <string>

#include <fmt/format.h>

#include "aep/csv.hpp"
#include "aep/errors.hpp"
#include "aep/parallel.hpp"

namespace aep {

char source_letter(Source s) {
  switch (s) {
    case Source::kLab:
      return 'L';
    case Source::kMedication:
      return 'M';
    case Source::kDiagnosis:
      return 'D';
  }
  return '?';
}

std::string FeatureKey::name() const {
  std::string out(1, source_letter(source));
  out += ':';
  out += code;
  return out;
}

FeatureKey FeatureKey::parse(std::string_view name) {
  if (name.size() < 3 || name[1] != ':') throw DataError(fmt::format("malformed feature name '{}'", name));
  FeatureKey key;
  switch (name[0]) {
    case 'L':
      key.source = Source::kLab;
      break;
    case 'M':
      key.source = Source::kMedication;
      break;
    case 'D':
      key.source = Source::kDiagnosis;
      break;
    default:
      throw DataError(fmt::format("unknown feature source in '{}'", name));
  }
  key.code = std::string(name.substr(2));
  return key;
}

std::size_t FeatureMatrix::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::optional<std::size_t> FeatureMatrix::column_index(const FeatureKey& key) const {
  auto it = std::find(feature_keys.begin(), feature_keys.end(), key);
  if (it == feature_keys.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_keys.begin());
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out;
  out.labels = labels;
  out.patient_ids = patient_ids;
  out.window_length = window_length;
  out.feature_keys.reserve(columns.size());
  for (std::size_t c : columns) out.feature_keys.push_back(feature_keys.at(c));
  out.values.reserve(rows() * columns.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c : columns) out.values.push_back(at(r, c));
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> selected) const {
  FeatureMatrix out;
  out.feature_keys = feature_keys;
  out.window_length = window_length;
  out.values.reserve(selected.size() * cols());
  for (std::size_t r : selected) {
    auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels.at(r));
    out.patient_ids.push_back(patient_ids.at(r));
  }
  return out;
}

LabTransform parse_lab_transform(std::string_view name) {
  if (name == "slope") return LabTransform::kSlope;
  if (name == "last_value") return LabTransform::kLastValue;
  if (name == "mean") return LabTransform::kMean;
  throw ConfigError(fmt::format("unknown lab transform '{}'", name));
}

const char* to_string(LabTransform t) {
  switch (t) {
    case LabTransform::kSlope:
      return "slope";
    case LabTransform::kLastValue:
      return "last_value";
    case LabTransform::kMean:
      return "mean";
  }
  return "?";
}

FeatureMap count_categorical(std::span<const Event> events, Source source) {
  const EventKind wanted = source == Source::kMedication ? EventKind::kDrug : EventKind::kDiagnosis;
  FeatureMap counts;
  if (source == Source::kLab) return counts;
  for (const Event& e : events) {
    if (e.kind == wanted) counts[FeatureKey{source, e.code}] += 1.0;
  }
  return counts;
}

std::optional<double> lr_transform(std::span<const LabPoint> points) {
  if (points.empty()) return std::nullopt;
  const auto n = static_cast<double>(points.size());
  double t_mean = 0.0;
  double v_mean = 0.0;
  for (const auto& p : points) {
    t_mean += p.timestamp;
    v_mean += p.value;
  }
  t_mean /= n;
  v_mean /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dt = p.timestamp - t_mean;
    sxx += dt * dt;
    sxy += dt * (p.value - v_mean);
  }
  if (sxx == 0.0) return 0.0;
  return sxy / sxx;
}

std::optional<double> summarize_lab(std::span<const LabPoint> points, LabTransform transform) {
  if (points.empty()) return std::nullopt;
  switch (transform) {
    case LabTransform::kSlope:
      return lr_transform(points);
    case LabTransform::kLastValue:
      return points.back().value;
    case LabTransform::kMean: {
      double sum = 0.0;
      for (const auto& p : points) sum += p.value;
      return sum / static_cast<double>(points.size());
    }
  }
  return std::nullopt;
}

FeatureMap aggregate_record(const PatientRecord& record, const Window& window, std::string_view target_code,
                            LabTransform transform) {
  std::vector<Event> events = slice_window(record, window);
  std::erase_if(events, [&](const Event& e) { return e.code == target_code; });

  FeatureMap features = count_categorical(events, Source::kMedication);
  features.merge(count_categorical(events, Source::kDiagnosis));

  std::map<std::string, std::vector<LabPoint>> series;
  for (const Event& e : events) {
    if (e.kind == EventKind::kLab && e.value) series[e.code].push_back({e.timestamp, *e.value});
  }
  for (const auto& [code, points] : series) {
    if (auto v = summarize_lab(points, transform)) features[FeatureKey{Source::kLab, code}] = *v;
  }
  return features;
}

FeatureMatrix build_matrix(const Cohort& cohort, LabTransform transform) {
  if (cohort.positives() == 0 || cohort.negatives() == 0) {
    throw DataError(fmt::format("degenerate cohort: {} positives, {} negatives", cohort.positives(),
                                cohort.negatives()));
  }
  std::vector<FeatureMap> per_member(cohort.members.size());
  parallel_for(cohort.members.size(), [&](std::size_t i) {
    const auto& m = cohort.members[i];
    per_member[i] = aggregate_record(m.record, m.window, cohort.target_code, transform);
  });

  std::set<FeatureKey> keys;
  for (const auto& features : per_member) {
    for (const auto& [key, value] : features) keys.insert(key);
  }

  FeatureMatrix out;
  out.feature_keys.assign(keys.begin(), keys.end());
  out.window_length = cohort.window_length_days;
  out.values.assign(cohort.members.size() * keys.size(), 0.0);
  for (std::size_t r = 0; r < cohort.members.size(); ++r) {
    // Both sequences are sorted by key, so a single merge pass aligns them.
    auto it = per_member[r].begin();
    for (std::size_t c = 0; c < out.feature_keys.size() && it != per_member[r].end(); ++c) {
      if (it->first == out.feature_keys[c]) {
        out.values[r * keys.size() + c] = it->second;
        ++it;
      }
    }
    out.labels.push_back(cohort.members[r].label == Label::kPositive ? 1 : 0);
    out.patient_ids.push_back(cohort.members[r].record.patient_id);
  }
  return out;
}

bool IntegrationApproach::includes(Source s) const {
  switch (s) {
    case Source::kLab:
      return lab;
    case Source::kMedication:
      return medication;
    case Source::kDiagnosis:
      return diagnosis;
  }
  return false;
}

std::string IntegrationApproach::name() const {
  std::string out;
  if (lab) out += 'L';
  if (medication) out += 'M';
  if (diagnosis) out += 'D';
  if (kbest) out += "-kbest";
  return out;
}

IntegrationApproach IntegrationApproach::parse(std::string_view name) {
  for (const auto& a : canonical()) {
    if (a.name() == name) return a;
  }
  throw ConfigError(fmt::format("unknown integration approach '{}'", name));
}

std::vector<IntegrationApproach> IntegrationApproach::canonical() {
  return {
      {true, false, false, false}, {false, true, false, false}, {false, false, true, false},
      {true, true, false, false},  {true, false, true, false},  {false, true, true, false},
      {true, true, true, false},   {true, true, true, true},
  };
}

FeatureMatrix project(const FeatureMatrix& matrix, const IntegrationApproach& approach) {
  if (approach.kbest) throw ConfigError(fmt::format("approach {} requires elimination stage", approach.name()));
  if (!approach.lab && !approach.medication && !approach.diagnosis) {
    throw ConfigError("integration approach must include at least one source");
  }
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    if (approach.includes(matrix.feature_keys[c].source)) keep.push_back(c);
  }
  return matrix.select_columns(keep);
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix) {
  out << "patient_id,label";
  for (const auto& key : matrix.feature_keys) out << ',' << csv::escape(key.name());
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << csv::escape(matrix.patient_ids[r]) << ',' << matrix.labels[r];
    for (double v : matrix.row(r)) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

FeatureMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature matrix CSV is empty");
  auto header = csv::split_line(csv::chomp(line));
  if (header.size() < 2 || header[0] != "patient_id" || header[1] != "label") {
    throw DataError("feature matrix CSV must start with patient_id,label");
  }
  FeatureMatrix m;
  for (std::size_t i = 2; i < header.size(); ++i) m.feature_keys.push_back(FeatureKey::parse(header[i]));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = csv::chomp(line);
    if (view.empty()) continue;
    auto fields = csv::split_line(view);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("line {}: expected {} fields, got {}", line_no, header.size(), fields.size()));
    }
    m.patient_ids.push_back(fields[0]);
    if (fields[1] != "0" && fields[1] != "1") throw DataError(fmt::format("line {}: label must be 0 or 1", line_no));
    m.labels.push_back(fields[1] == "1" ? 1 : 0);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec != std::errc() || ptr != fields[i].data() + fields[i].size() || !std::isfinite(v)) {
        throw DataError(fmt::format("line {}: bad value in column {}", line_no, header[i]));
      }
      m.values.push_back(v);
    }
  }
  return m;
}

}  // namespace aep
