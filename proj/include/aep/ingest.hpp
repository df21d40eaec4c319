#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "aep/ehr.hpp"

namespace aep {

enum class EventFormat { kCsv, kJsonl };

EventFormat parse_event_format(std::string_view name);

// Fixed column order of the event interchange CSV.
inline constexpr std::string_view kEventCsvHeader = "patient_id,kind,code,value,date";

struct ParseWarning {
  std::size_t line = 0;  // 1-based, header is line 1 for CSV
  std::string message;
};

struct ParsedEvents {
  std::map<std::string, PatientRecord> records;
  std::vector<ParseWarning> warnings;
  std::optional<std::chrono::sys_days> epoch;  // minimum date among retained rows
};

// Parses "YYYY-MM-DD". Returns nullopt for anything else or an invalid date.
std::optional<std::chrono::sys_days> parse_iso_date(std::string_view text);
std::string format_iso_date(std::chrono::sys_days day);

// Malformed rows are skipped and reported; a stream that cannot be read or a
// CSV without the mandatory header throws DataError.
ParsedEvents parse_events(std::istream& source, EventFormat format);

enum class ControlIndexPolicy { kLastEvent, kRandomEvent };

ControlIndexPolicy parse_control_policy(std::string_view name);
const char* to_string(ControlIndexPolicy policy);

struct CohortConfig {
  std::string target_code;
  int window_length_days = 90;
  ControlIndexPolicy control_index_policy = ControlIndexPolicy::kLastEvent;
  bool include_index_day = true;
  int min_events_in_window = 0;
  std::uint64_t seed = 0;
};

// Positives are anchored at their first target-code event, controls per the
// configured policy. Throws DataError when either class ends up empty.
Cohort build_cohort(const std::map<std::string, PatientRecord>& records, const CohortConfig& config);

// Text form used to compare cohorts byte for byte.
void write_cohort(std::ostream& out, const Cohort& cohort);

}  // namespace aep
