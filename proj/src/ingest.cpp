#include "aep/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>

#include <fmt/format.h>

#include "aep/csv.hpp"
#include "aep/errors.hpp"
#include "aep/random.hpp"

namespace aep {
namespace {

struct RawRow {
  std::string patient_id;
  EventKind kind;
  std::string code;
  std::optional<double> value;
  std::chrono::sys_days date;
};

std::optional<EventKind> parse_kind(std::string_view s) {
  if (s == "lab") return EventKind::kLab;
  if (s == "drug") return EventKind::kDrug;
  if (s == "diag") return EventKind::kDiagnosis;
  return std::nullopt;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Shared validation for both formats. Returns an error message or the row.
std::variant<RawRow, std::string> make_row(std::string patient_id, std::string_view kind_text, std::string code,
                                           std::optional<double> value, std::string_view date_text) {
  if (patient_id.empty()) return std::string("empty patient_id");
  auto kind = parse_kind(kind_text);
  if (!kind) return fmt::format("unknown kind '{}'", kind_text);
  if (code.empty()) return std::string("empty code");
  if (*kind == EventKind::kLab && !value) return std::string("lab row without value");
  if (*kind != EventKind::kLab && value) return std::string("value on categorical row");
  if (value && !std::isfinite(*value)) return std::string("non-finite value");
  auto date = parse_iso_date(date_text);
  if (!date) return fmt::format("invalid date '{}'", date_text);
  return RawRow{std::move(patient_id), *kind, std::move(code), value, *date};
}

std::variant<RawRow, std::string> parse_csv_row(std::string_view line) {
  auto fields = csv::split_line(line);
  if (fields.size() != 5) return fmt::format("expected 5 fields, got {}", fields.size());
  std::optional<double> value;
  if (!fields[3].empty()) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), v);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size()) {
      return fmt::format("unparseable value '{}'", fields[3]);
    }
    value = v;
  }
  return make_row(std::move(fields[0]), fields[1], std::move(fields[2]), value, fields[4]);
}

std::variant<RawRow, std::string> parse_jsonl_row(std::string_view line) {
  auto obj = nlohmann::json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return std::string("not a JSON object");
  for (const char* key : {"patient_id", "kind", "code", "date"}) {
    if (!obj.contains(key) || !obj[key].is_string()) return fmt::format("missing or non-string '{}'", key);
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto& k = it.key();
    if (k != "patient_id" && k != "kind" && k != "code" && k != "value" && k != "date") {
      return fmt::format("unknown key '{}'", k);
    }
  }
  std::optional<double> value;
  if (obj.contains("value") && !obj["value"].is_null()) {
    const auto& v = obj["value"];
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string() && v.get<std::string>().empty()) {
      // empty string is treated like the CSV empty field
    } else {
      return std::string("value must be a number, null or empty");
    }
  }
  return make_row(obj["patient_id"].get<std::string>(), obj["kind"].get<std::string>(),
                  obj["code"].get<std::string>(), value, obj["date"].get<std::string>());
}

}  // namespace

EventFormat parse_event_format(std::string_view name) {
  if (name == "csv") return EventFormat::kCsv;
  if (name == "jsonl") return EventFormat::kJsonl;
  throw ConfigError(fmt::format("unknown event format '{}'", name));
}

std::optional<std::chrono::sys_days> parse_iso_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

ParsedEvents parse_events(std::istream& source, EventFormat format) {
  if (!source) throw DataError("event stream is not readable");

  ParsedEvents out;
  std::vector<RawRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = format != EventFormat::kCsv;
  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view = csv::chomp(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (!header_seen) {
      if (view != kEventCsvHeader) {
        throw DataError(fmt::format("line 1: expected header '{}'", kEventCsvHeader));
      }
      header_seen = true;
      continue;
    }
    if (view.empty()) continue;
    auto parsed = format == EventFormat::kCsv ? parse_csv_row(view) : parse_jsonl_row(view);
    if (auto* err = std::get_if<std::string>(&parsed)) {
      out.warnings.push_back({line_no, std::move(*err)});
      continue;
    }
    rows.push_back(std::move(std::get<RawRow>(parsed)));
  }
  if (source.bad()) throw DataError("I/O error while reading event stream");
  if (rows.empty()) return out;

  const auto epoch = std::min_element(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
                       return a.date < b.date;
                     })->date;
  out.epoch = epoch;
  for (auto& row : rows) {
    auto& record = out.records[row.patient_id];
    record.patient_id = row.patient_id;
    record.events.push_back(
        Event{std::move(row.code), row.kind, row.value, static_cast<Day>((row.date - epoch).count())});
  }
  for (auto& [id, record] : out.records) {
    std::stable_sort(record.events.begin(), record.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  }
  return out;
}

ControlIndexPolicy parse_control_policy(std::string_view name) {
  if (name == "last_event") return ControlIndexPolicy::kLastEvent;
  if (name == "random_event") return ControlIndexPolicy::kRandomEvent;
  throw ConfigError(fmt::format("unknown control_index_policy '{}'", name));
}

const char* to_string(ControlIndexPolicy policy) {
  return policy == ControlIndexPolicy::kLastEvent ? "last_event" : "random_event";
}

Cohort build_cohort(const std::map<std::string, PatientRecord>& records, const CohortConfig& config) {
  if (config.window_length_days < 1) throw ConfigError("window_length_days must be >= 1");
  if (config.min_events_in_window < 0) throw ConfigError("min_events_in_window must be >= 0");
  if (config.target_code.empty()) throw ConfigError("target_code must not be empty");
  if (records.empty()) throw DataError("degenerate cohort: no patient records");

  Cohort cohort;
  cohort.target_code = config.target_code;
  cohort.window_length_days = config.window_length_days;
  for (const auto& [id, record] : records) {
    CohortMember member;
    member.record.patient_id = record.patient_id;

    std::optional<Day> index_day;
    for (const Event& e : record.events) {
      if (e.code == config.target_code) {
        index_day = e.timestamp;
        member.label = Label::kPositive;
        break;
      }
    }
    for (const Event& e : record.events) {
      if (e.code != config.target_code) member.record.events.push_back(e);
    }
    if (!index_day) {
      if (record.events.empty()) continue;
      if (config.control_index_policy == ControlIndexPolicy::kLastEvent) {
        index_day = record.events.back().timestamp;
      } else {
        Rng rng(derive_seed(config.seed, stable_hash(record.patient_id)));
        index_day = record.events[rng.below(record.events.size())].timestamp;
      }
    }
    member.window.t_start = *index_day - config.window_length_days;
    member.window.t_end = config.include_index_day ? *index_day : *index_day - 1;

    const auto in_window = static_cast<int>(slice_window(member.record, member.window).size());
    if (in_window < config.min_events_in_window) continue;
    cohort.members.push_back(std::move(member));
  }

  const std::size_t pos = cohort.positives();
  const std::size_t neg = cohort.negatives();
  if (pos == 0 || neg == 0) {
    throw DataError(fmt::format("degenerate cohort: {} positives, {} negatives for target '{}'", pos, neg,
                                config.target_code));
  }
  return cohort;
}

void write_cohort(std::ostream& out, const Cohort& cohort) {
  out << "# target " << cohort.target_code << '\n';
  out << "patient_id,label,t_start,t_end,n_events\n";
  for (const auto& m : cohort.members) {
    out << csv::escape(m.record.patient_id) << ',' << static_cast<int>(m.label) << ',' << m.window.t_start << ','
        << m.window.t_end << ',' << m.record.events.size() << '\n';
    for (const auto& e : m.record.events) {
      out << "  " << to_string(e.kind) << ',' << csv::escape(e.code) << ','
          << (e.value ? fmt::format("{}", *e.value) : std::string()) << ',' << e.timestamp << '\n';
    }
  }
}

}  // namespace aep
