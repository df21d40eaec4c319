#include "aep/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <string_view>

#include <fmt/format.h>

#include "aep/errors.hpp"

namespace aep {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where.empty() ? "config" : where));
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}{}'", where.empty() ? "" : where + ".", it.key()));
  }
}

std::string path_of(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : fmt::format("{}.{}", where, key);
}

template <typename T>
T get(const json& j, const std::string& where, std::string_view key) {
  const json& v = j.at(std::string(key));
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError("");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("key '{}' has the wrong type", path_of(where, key)));
  }
}

template <typename T>
void maybe(const json& j, const std::string& where, std::string_view key, T& out) {
  if (j.contains(std::string(key))) out = get<T>(j, where, key);
}

// Accepts a number or the string "inf".
double real_or_inf(const json& j, const std::string& where, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    return std::numeric_limits<double>::infinity();
  }
  return get<double>(j, where, key);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(fmt::format("config '{}' is not valid JSON", path.string()));
  return j;
}

}  // namespace

SynthConfig synth_config_from_json(const json& j) {
  reject_unknown(j, "",
                 {"n_patients", "positive_fraction", "n_lab_codes", "n_drug_codes", "n_diag_codes", "informative",
                  "events_per_patient", "window_length_days", "target_code", "code_frequency", "lab_presence",
                  "lab_slope_sd", "lab_noise_sd", "history_days", "seed"});
  SynthConfig c;
  maybe(j, "", "n_patients", c.n_patients);
  maybe(j, "", "positive_fraction", c.positive_fraction);
  maybe(j, "", "n_lab_codes", c.n_lab_codes);
  maybe(j, "", "n_drug_codes", c.n_drug_codes);
  maybe(j, "", "n_diag_codes", c.n_diag_codes);
  maybe(j, "", "events_per_patient", c.events_per_patient);
  maybe(j, "", "window_length_days", c.window_length_days);
  maybe(j, "", "target_code", c.target_code);
  maybe(j, "", "lab_presence", c.lab_presence);
  maybe(j, "", "lab_slope_sd", c.lab_slope_sd);
  maybe(j, "", "lab_noise_sd", c.lab_noise_sd);
  maybe(j, "", "history_days", c.history_days);
  maybe(j, "", "seed", c.seed);
  if (j.contains("code_frequency")) {
    const auto f = get<std::string>(j, "", "code_frequency");
    if (f == "uniform") {
      c.code_frequency = CodeFrequency::kUniform;
    } else if (f == "zipf") {
      c.code_frequency = CodeFrequency::kZipf;
    } else {
      throw ConfigError(fmt::format("key 'code_frequency' must be uniform or zipf, got '{}'", f));
    }
  }
  if (j.contains("informative")) {
    const json& list = j.at("informative");
    if (!list.is_array()) throw ConfigError("key 'informative' must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = fmt::format("informative[{}]", i);
      reject_unknown(list[i], where, {"key", "effect", "magnitude"});
      InformativeFeature f;
      try {
        f.key = FeatureKey::parse(get<std::string>(list[i], where, "key"));
      } catch (const DataError& e) {
        throw ConfigError(fmt::format("key '{}.key': {}", where, e.what()));
      }
      const auto effect = get<std::string>(list[i], where, "effect");
      if (effect == "count_shift") {
        f.effect = PlantedEffect::kCountShift;
      } else if (effect == "slope_shift") {
        f.effect = PlantedEffect::kSlopeShift;
      } else {
        throw ConfigError(fmt::format("key '{}.effect' must be count_shift or slope_shift", where));
      }
      f.magnitude = get<double>(list[i], where, "magnitude");
      c.informative.push_back(std::move(f));
    }
  }
  c.validate();
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) { return synth_config_from_json(read_json(path)); }

ClassifierSpec classifier_spec_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where,
                 {"kind", "name", "n_trees", "max_depth", "min_samples_leaf", "features_per_split", "learning_rate",
                  "l2_penalty", "class_weight", "seed"});
  ClassifierSpec s;
  if (!j.contains("kind")) throw ConfigError(fmt::format("missing key '{}.kind'", where));
  s.kind = parse_classifier_kind(get<std::string>(j, where, "kind"));
  maybe(j, where, "name", s.name);
  maybe(j, where, "n_trees", s.n_trees);
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) s.max_depth = get<int>(j, where, "max_depth");
  maybe(j, where, "min_samples_leaf", s.min_samples_leaf);
  if (j.contains("features_per_split")) {
    const json& v = j.at("features_per_split");
    s.features_per_split = FeatureSampling::parse(v.is_number_integer() ? std::to_string(v.get<long>())
                                                                        : get<std::string>(j, where, "features_per_split"));
  }
  maybe(j, where, "learning_rate", s.learning_rate);
  maybe(j, where, "l2_penalty", s.l2_penalty);
  if (j.contains("class_weight")) s.class_weight = parse_class_weight(get<std::string>(j, where, "class_weight"));
  maybe(j, where, "seed", s.seed);
  s.validate();
  return s;
}

RfeConfig rfe_config_from_json(const json& j) {
  const std::string where = "rfe";
  reject_unknown(j, where, {"alpha", "beta", "k", "rule", "step", "validation_fraction", "seed"});
  RfeConfig r;
  maybe(j, where, "alpha", r.alpha);
  if (j.contains("beta")) r.beta = real_or_inf(j, where, "beta");
  if (!j.contains("k")) throw ConfigError("missing key 'rfe.k'");
  r.k = get<std::size_t>(j, where, "k");
  if (j.contains("rule")) r.rule = parse_elimination_rule(get<std::string>(j, where, "rule"));
  maybe(j, where, "step", r.step);
  maybe(j, where, "validation_fraction", r.validation_fraction);
  maybe(j, where, "seed", r.seed);
  r.validate();
  return r;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "",
                 {"events", "format", "ade", "cohort", "lab_transform", "classifiers", "rfe", "approaches", "n_folds",
                  "seed", "output_dir"});
  RunConfig rc;
  for (const char* required : {"events", "cohort", "classifiers", "approaches"}) {
    if (!j.contains(required)) throw ConfigError(fmt::format("missing key '{}'", required));
  }
  rc.events = base_dir / get<std::string>(j, "", "events");
  if (!std::filesystem::exists(rc.events)) {
    throw ConfigError(fmt::format("key 'events': file '{}' does not exist", rc.events.string()));
  }
  if (j.contains("format")) rc.format = parse_event_format(get<std::string>(j, "", "format"));

  const json& cj = j.at("cohort");
  reject_unknown(cj, "cohort",
                 {"target_code", "window_length_days", "control_index_policy", "include_index_day",
                  "min_events_in_window", "seed"});
  if (!cj.contains("target_code")) throw ConfigError("missing key 'cohort.target_code'");
  rc.cohort.target_code = get<std::string>(cj, "cohort", "target_code");
  maybe(cj, "cohort", "window_length_days", rc.cohort.window_length_days);
  if (cj.contains("control_index_policy")) {
    rc.cohort.control_index_policy = parse_control_policy(get<std::string>(cj, "cohort", "control_index_policy"));
  }
  maybe(cj, "cohort", "include_index_day", rc.cohort.include_index_day);
  maybe(cj, "cohort", "min_events_in_window", rc.cohort.min_events_in_window);
  maybe(cj, "cohort", "seed", rc.cohort.seed);
  if (rc.cohort.window_length_days < 1) throw ConfigError("key 'cohort.window_length_days' must be >= 1");
  if (rc.cohort.min_events_in_window < 0) throw ConfigError("key 'cohort.min_events_in_window' must be >= 0");

  rc.ade = rc.cohort.target_code;
  maybe(j, "", "ade", rc.ade);
  if (j.contains("lab_transform")) rc.lab_transform = parse_lab_transform(get<std::string>(j, "", "lab_transform"));

  const json& cls = j.at("classifiers");
  if (!cls.is_array() || cls.empty()) throw ConfigError("key 'classifiers' must be a non-empty array");
  for (std::size_t i = 0; i < cls.size(); ++i) {
    rc.classifiers.push_back(classifier_spec_from_json(cls[i], fmt::format("classifiers[{}]", i)));
  }

  const json& ap = j.at("approaches");
  if (!ap.is_array() || ap.empty()) throw ConfigError("key 'approaches' must be a non-empty array");
  for (const auto& a : ap) {
    if (!a.is_string()) throw ConfigError("key 'approaches' must hold strings");
    rc.approaches.push_back(IntegrationApproach::parse(a.get<std::string>()));
  }

  if (j.contains("rfe")) rc.rfe = rfe_config_from_json(j.at("rfe"));
  for (const auto& a : rc.approaches) {
    if (a.kbest && !rc.rfe) throw ConfigError("approach LMD-kbest requires an 'rfe' section");
  }

  maybe(j, "", "n_folds", rc.n_folds);
  maybe(j, "", "seed", rc.seed);
  rc.output_dir = base_dir / (j.contains("output_dir") ? get<std::string>(j, "", "output_dir") : std::string("out"));
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json(path), path.parent_path());
}

}  // namespace aep
