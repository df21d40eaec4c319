#include "aep/ehr.hpp"

#include <algorithm>
#include <cmath>

namespace aep {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kLab:
      return "lab";
    case EventKind::kDrug:
      return "drug";
    case EventKind::kDiagnosis:
      return "diag";
  }
  return "?";
}

std::size_t Cohort::positives() const {
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [](const CohortMember& m) {
    return m.label == Label::kPositive;
  }));
}

std::vector<Event> slice_window(const PatientRecord& record, const Window& window) {
  // Records are sorted, so the window is a contiguous run.
  auto first = std::partition_point(record.events.begin(), record.events.end(),
                                    [&](const Event& e) { return e.timestamp < window.t_start; });
  auto last = std::partition_point(first, record.events.end(),
                                   [&](const Event& e) { return e.timestamp <= window.t_end; });
  return {first, last};
}

std::vector<Violation> validate_record(const PatientRecord& record) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < record.events.size(); ++i) {
    const Event& e = record.events[i];
    if (i > 0 && e.timestamp < record.events[i - 1].timestamp) {
      out.push_back({i, "unsorted"});
    }
    if (e.kind == EventKind::kLab) {
      if (!e.value) {
        out.push_back({i, "missing value on lab event"});
      } else if (!std::isfinite(*e.value)) {
        out.push_back({i, "non-finite value"});
      }
    } else if (e.value) {
      out.push_back({i, "value on categorical event"});
    }
  }
  return out;
}

}  // namespace aep
