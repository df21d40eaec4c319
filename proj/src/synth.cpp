#include "aep/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <span>

#include <fmt/format.h>

#include "aep/errors.hpp"
#include "aep/ingest.hpp"
#include "aep/random.hpp"

namespace aep {
namespace {

constexpr std::chrono::sys_days kBaseDate{std::chrono::year{2010} / 1 / 1};
constexpr int kPreWindowDays = 180;

struct Row {
  Day day;
  EventKind kind;
  std::string code;
  std::optional<double> value;
};

// Picks an index in [0, n) under the configured code frequency.
class CodeSampler {
 public:
  CodeSampler(int n, CodeFrequency freq) {
    cumulative_.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += freq == CodeFrequency::kZipf ? 1.0 / (i + 1) : 1.0;
      cumulative_[static_cast<std::size_t>(i)] = total;
    }
    for (double& c : cumulative_) c /= total;
  }

  int draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<int>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

const InformativeFeature* planted(const SynthConfig& c, Source source, const std::string& code) {
  for (const auto& f : c.informative) {
    if (f.key.source == source && f.key.code == code) return &f;
  }
  return nullptr;
}

const char* effect_name(PlantedEffect e) { return e == PlantedEffect::kCountShift ? "count_shift" : "slope_shift"; }

}  // namespace

std::string lab_code(int i) { return fmt::format("NPU{:05d}", i + 1); }
std::string drug_code(int i) { return fmt::format("A{:02d}AA{:02d}", i / 10 + 1, i % 10 + 1); }
std::string diag_code(int i) { return fmt::format("K{:02d}.{}", i / 10, i % 10); }

void SynthConfig::validate() const {
  if (n_patients < 2) throw ConfigError("n_patients must be >= 2");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) throw ConfigError("positive_fraction must lie in (0, 1)");
  const int n_pos = static_cast<int>(std::lround(n_patients * positive_fraction));
  if (n_pos < 1 || n_pos >= n_patients) throw ConfigError("positive_fraction leaves one class empty");
  if (n_lab_codes < 0 || n_drug_codes < 0 || n_diag_codes < 0) throw ConfigError("code counts must be >= 0");
  if (n_drug_codes + n_diag_codes < 1) throw ConfigError("need at least one categorical code");
  if (n_lab_codes > 99999 || n_drug_codes > 990 || n_diag_codes > 1000) throw ConfigError("code universe too large");
  if (!(events_per_patient >= 0.0) || !std::isfinite(events_per_patient)) {
    throw ConfigError("events_per_patient must be >= 0");
  }
  if (window_length_days < 1) throw ConfigError("window_length_days must be >= 1");
  if (!(lab_presence >= 0.0 && lab_presence <= 1.0)) throw ConfigError("lab_presence must lie in [0, 1]");
  if (!(lab_slope_sd >= 0.0) || !(lab_noise_sd >= 0.0)) throw ConfigError("lab spreads must be >= 0");
  if (history_days < 1) throw ConfigError("history_days must be >= 1");
  if (target_code.empty()) throw ConfigError("target_code must not be empty");
  for (int i = 0; i < n_diag_codes; ++i) {
    if (diag_code(i) == target_code) throw ConfigError("target_code collides with a background diagnosis code");
  }
  for (const auto& f : informative) {
    if (!std::isfinite(f.magnitude)) throw ConfigError(fmt::format("magnitude of {} is not finite", f.key.name()));
    bool known = false;
    switch (f.key.source) {
      case Source::kLab:
        for (int i = 0; i < n_lab_codes && !known; ++i) known = lab_code(i) == f.key.code;
        if (f.effect != PlantedEffect::kSlopeShift) throw ConfigError(f.key.name() + ": lab keys take slope_shift");
        break;
      case Source::kMedication:
        for (int i = 0; i < n_drug_codes && !known; ++i) known = drug_code(i) == f.key.code;
        if (f.effect != PlantedEffect::kCountShift) throw ConfigError(f.key.name() + ": drug keys take count_shift");
        break;
      case Source::kDiagnosis:
        for (int i = 0; i < n_diag_codes && !known; ++i) known = diag_code(i) == f.key.code;
        if (f.effect != PlantedEffect::kCountShift) throw ConfigError(f.key.name() + ": diag keys take count_shift");
        break;
    }
    if (!known) throw ConfigError(fmt::format("informative key {} is not in the code universe", f.key.name()));
    if (f.effect == PlantedEffect::kCountShift && f.magnitude < 0.0) {
      throw ConfigError(fmt::format("count_shift magnitude of {} must be >= 0", f.key.name()));
    }
  }
}

SynthConfig canonical_synth_config(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.informative = {
      {{Source::kLab, lab_code(0)}, PlantedEffect::kSlopeShift, 0.05},
      {{Source::kLab, lab_code(1)}, PlantedEffect::kSlopeShift, -0.05},
      {{Source::kMedication, drug_code(0)}, PlantedEffect::kCountShift, 1.5},
      {{Source::kMedication, drug_code(1)}, PlantedEffect::kCountShift, 1.5},
      {{Source::kDiagnosis, diag_code(0)}, PlantedEffect::kCountShift, 1.5},
  };
  return c;
}

SynthOutput generate(const SynthConfig& c) {
  c.validate();

  const int n_pos = static_cast<int>(std::lround(c.n_patients * c.positive_fraction));
  std::vector<int> is_positive(static_cast<std::size_t>(c.n_patients), 0);
  std::fill_n(is_positive.begin(), n_pos, 1);
  Rng assign(derive_seed(c.seed, 0));
  assign.shuffle(std::span(is_positive));

  const CodeSampler drugs(std::max(c.n_drug_codes, 1), c.code_frequency);
  const CodeSampler diags(std::max(c.n_diag_codes, 1), c.code_frequency);
  const double drug_share =
      static_cast<double>(c.n_drug_codes) / static_cast<double>(c.n_drug_codes + c.n_diag_codes);

  std::string out(kEventCsvHeader);
  out += '\n';
  for (int p = 0; p < c.n_patients; ++p) {
    Rng rng(derive_seed(c.seed, 1, static_cast<std::uint64_t>(p)));
    const bool positive = is_positive[static_cast<std::size_t>(p)] == 1;
    const Day index = kPreWindowDays + c.window_length_days + static_cast<Day>(rng.below(static_cast<std::uint64_t>(c.history_days)));
    const Day start = index - c.window_length_days;
    auto window_day = [&] { return start + static_cast<Day>(rng.below(static_cast<std::uint64_t>(c.window_length_days + 1))); };

    std::vector<Row> rows;
    auto categorical = [&](Day day) {
      if (c.n_diag_codes == 0 || (c.n_drug_codes > 0 && rng.bernoulli(drug_share))) {
        rows.push_back({day, EventKind::kDrug, drug_code(drugs.draw(rng)), std::nullopt});
      } else {
        rows.push_back({day, EventKind::kDiagnosis, diag_code(diags.draw(rng)), std::nullopt});
      }
    };

    // Background history: some events before the window, most inside it,
    // and one on the index day so controls anchor at the same place.
    const int before = rng.poisson(c.events_per_patient / 4.0);
    for (int e = 0; e < before; ++e) {
      categorical(start - 1 - static_cast<Day>(rng.below(kPreWindowDays)));
    }
    const int inside = rng.poisson(c.events_per_patient);
    for (int e = 0; e < inside; ++e) categorical(window_day());
    categorical(index);

    for (int l = 0; l < c.n_lab_codes; ++l) {
      const std::string code = lab_code(l);
      if (!rng.bernoulli(c.lab_presence)) continue;
      double slope = rng.normal(0.0, c.lab_slope_sd);
      if (positive) {
        if (const auto* f = planted(c, Source::kLab, code)) slope += f->magnitude;
      }
      const double level = rng.normal(50.0, 10.0);
      const int points = 2 + rng.poisson(2.0);
      for (int k = 0; k < points; ++k) {
        const Day day = window_day();
        const double value = level + slope * (day - index) + rng.normal(0.0, c.lab_noise_sd);
        rows.push_back({day, EventKind::kLab, code, value});
      }
    }

    if (positive) {
      for (const auto& f : c.informative) {
        if (f.effect != PlantedEffect::kCountShift) continue;
        const EventKind kind = f.key.source == Source::kMedication ? EventKind::kDrug : EventKind::kDiagnosis;
        const int extra = rng.poisson(f.magnitude);
        for (int e = 0; e < extra; ++e) rows.push_back({window_day(), kind, f.key.code, std::nullopt});
      }
      rows.push_back({index, EventKind::kDiagnosis, c.target_code, std::nullopt});
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.day < b.day; });
    const std::string id = fmt::format("P{:05d}", p);
    for (const auto& r : rows) {
      out += id;
      out += ',';
      out += to_string(r.kind);
      out += ',';
      out += r.code;
      out += ',';
      if (r.value) out += fmt::format("{:.4f}", *r.value);
      out += ',';
      out += format_iso_date(kBaseDate + std::chrono::days{r.day});
      out += '\n';
    }
  }

  nlohmann::ordered_json m;
  m["seed"] = c.seed;
  m["n_patients"] = c.n_patients;
  m["n_positive"] = n_pos;
  m["n_negative"] = c.n_patients - n_pos;
  m["target_code"] = c.target_code;
  m["window_length_days"] = c.window_length_days;
  m["code_universe"] = {{"lab", c.n_lab_codes}, {"drug", c.n_drug_codes}, {"diag", c.n_diag_codes}};
  auto& inf = m["informative"] = nlohmann::ordered_json::array();
  for (const auto& f : c.informative) {
    inf.push_back({{"key", f.key.name()}, {"effect", effect_name(f.effect)}, {"magnitude", f.magnitude}});
  }
  const nlohmann::ordered_json background = {
      {"events_per_patient", c.events_per_patient},
      {"code_frequency", c.code_frequency == CodeFrequency::kUniform ? "uniform" : "zipf"},
      {"lab_presence", c.lab_presence},
      {"lab_slope_sd", c.lab_slope_sd},
      {"lab_noise_sd", c.lab_noise_sd},
  };
  m["classes"] = {
      {"negative", {{"background", background}}},
      {"positive", {{"background", background}, {"planted", "informative effects applied"}}},
  };

  return SynthOutput{std::move(out), m.dump(2) + "\n", n_pos, c.n_patients - n_pos};
}

}  // namespace aep
