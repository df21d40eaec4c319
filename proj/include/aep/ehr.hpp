#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aep {

// Day index relative to a dataset epoch.
using Day = std::int32_t;

enum class EventKind : std::uint8_t {
  kLab,        // continuous, carries a value
  kDrug,       // categorical, ATC code
  kDiagnosis,  // categorical, ICD-10 code
};

const char* to_string(EventKind kind);

struct Event {
  std::string code;
  EventKind kind = EventKind::kDiagnosis;
  std::optional<double> value;
  Day timestamp = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct PatientRecord {
  std::string patient_id;
  std::vector<Event> events;  // non-decreasing timestamps
};

// Closed interval [t_start, t_end].
struct Window {
  Day t_start = 0;
  Day t_end = 0;

  bool contains(Day t) const { return t_start <= t && t <= t_end; }
  friend bool operator==(const Window&, const Window&) = default;
};

enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

struct CohortMember {
  PatientRecord record;  // target-code events already removed
  Label label = Label::kNegative;
  Window window;
};

struct Cohort {
  std::string target_code;
  int window_length_days = 0;
  std::vector<CohortMember> members;

  std::size_t positives() const;
  std::size_t negatives() const { return members.size() - positives(); }
};

// Events with t_start <= timestamp <= t_end, in record order.
std::vector<Event> slice_window(const PatientRecord& record, const Window& window);

struct Violation {
  std::size_t event_index;
  std::string message;
};

// Empty result means the record is well formed.
std::vector<Violation> validate_record(const PatientRecord& record);

}  // namespace aep
