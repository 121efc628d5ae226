#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpix/errors.hpp"
#include "kpix/fiscal.hpp"
#include "kpix/provider.hpp"
#include "kpix/similarity.hpp"

namespace kpix::config {

struct Thresholds {
  double cluster_similarity = 0.85;
  double value_tolerance = 0.01;
  double gestalt = 0.8;
  double scaled_similarity = 0.75;
  int min_periods = 4;
  int max_sentences = 10;
};

struct PipelineConfig {
  std::vector<provider::ProviderConfig> providers;
  std::optional<provider::ProviderConfig> judge;
  sim::ScorerConfig scorer;
  Thresholds thresholds;
  std::vector<double> sweep_thresholds = {0.75, 0.80, 0.85, 0.90};
  std::string output_dir = "out";
  std::string replay_dir;
  fiscal::FiscalCalendar calendar = fiscal::FiscalCalendar::defaults();
};

namespace detail {

inline provider::ProviderConfig provider_from_json(const nlohmann::json& j,
                                                   const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object");
  provider::ProviderConfig p;
  p.model_id = j.value("model_id", "");
  p.endpoint = j.value("endpoint", "");
  p.credential_env = j.value("credential_env", "");
  p.max_retries = j.value("max_retries", p.max_retries);
  p.parallelism = j.value("parallelism", p.parallelism);
  p.timeout_seconds = j.value("timeout_seconds", p.timeout_seconds);
  p.backoff_base_ms = j.value("backoff_base_ms", p.backoff_base_ms);
  p.supports_schema = j.value("supports_schema", p.supports_schema);
  p.prompt_price_per_1k = j.value("prompt_price_per_1k", 0.0);
  p.completion_price_per_1k = j.value("completion_price_per_1k", 0.0);
  if (p.model_id.empty()) {
    throw ConfigError(std::string(what) + " is missing model_id");
  }
  if (p.max_retries < 0) {
    throw ConfigError(std::string(what) + " has negative max_retries");
  }
  if (p.parallelism < 1) {
    throw ConfigError(std::string(what) + " parallelism must be >= 1");
  }
  return p;
}

inline nlohmann::json provider_to_json(const provider::ProviderConfig& p) {
  return nlohmann::json{{"model_id", p.model_id},
                        {"endpoint", p.endpoint},
                        {"credential_env", p.credential_env},
                        {"max_retries", p.max_retries},
                        {"parallelism", p.parallelism},
                        {"timeout_seconds", p.timeout_seconds},
                        {"backoff_base_ms", p.backoff_base_ms},
                        {"supports_schema", p.supports_schema},
                        {"prompt_price_per_1k", p.prompt_price_per_1k},
                        {"completion_price_per_1k", p.completion_price_per_1k}};
}

inline void check_unit_interval(double v, const char* name) {
  if (v < 0.0 || v > 1.0) {
    throw ConfigError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace detail

/// Strict on the shape that matters: unknown top-level keys are rejected so
/// a typo cannot silently fall back to a default.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  static const std::set<std::string> kKnown = {
      "providers", "judge",          "scorer", "thresholds", "sweep_thresholds",
      "output_dir", "replay_dir",    "fiscal_calendar"};
  for (const auto& [key, unused] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown config key: " + key);
  }

  PipelineConfig c;
  if (j.contains("providers")) {
    if (!j["providers"].is_array()) throw ConfigError("providers must be an array");
    std::set<std::string> seen;
    for (const auto& jp : j["providers"]) {
      auto p = detail::provider_from_json(jp, "provider");
      if (!seen.insert(p.model_id).second) {
        throw ConfigError("duplicate provider model_id: " + p.model_id);
      }
      c.providers.push_back(std::move(p));
    }
  }
  if (j.contains("judge") && !j["judge"].is_null()) {
    c.judge = detail::provider_from_json(j["judge"], "judge");
  }
  if (j.contains("scorer")) {
    const auto& js = j["scorer"];
    if (!js.is_object()) throw ConfigError("scorer must be an object");
    std::string kind = js.value("kind", "lexical");
    if (kind == "lexical" || kind == "lexical_fallback") {
      c.scorer.kind = sim::ScorerKind::lexical_fallback;
    } else if (kind == "remote" || kind == "cross_encoder_remote") {
      c.scorer.kind = sim::ScorerKind::cross_encoder_remote;
    } else {
      throw ConfigError("unknown scorer kind: " + kind);
    }
    c.scorer.endpoint = js.value("endpoint", "");
    c.scorer.model = js.value("model", "");
    c.scorer.credential_env = js.value("credential_env", "");
    c.scorer.batch_size = js.value("batch_size", c.scorer.batch_size);
    c.scorer.timeout_seconds = js.value("timeout_seconds", c.scorer.timeout_seconds);
    if (c.scorer.kind == sim::ScorerKind::cross_encoder_remote &&
        c.scorer.endpoint.empty()) {
      throw ConfigError("remote scorer requires an endpoint");
    }
    if (c.scorer.batch_size < 1) throw ConfigError("scorer batch_size must be >= 1");
  }
  if (j.contains("thresholds")) {
    const auto& jt = j["thresholds"];
    if (!jt.is_object()) throw ConfigError("thresholds must be an object");
    c.thresholds.cluster_similarity =
        jt.value("cluster_similarity", c.thresholds.cluster_similarity);
    c.thresholds.value_tolerance =
        jt.value("value_tolerance", c.thresholds.value_tolerance);
    c.thresholds.gestalt = jt.value("gestalt", c.thresholds.gestalt);
    c.thresholds.scaled_similarity =
        jt.value("scaled_similarity", c.thresholds.scaled_similarity);
    c.thresholds.min_periods = jt.value("min_periods", c.thresholds.min_periods);
    c.thresholds.max_sentences = jt.value("max_sentences", c.thresholds.max_sentences);
    detail::check_unit_interval(c.thresholds.cluster_similarity, "cluster_similarity");
    detail::check_unit_interval(c.thresholds.gestalt, "gestalt");
    detail::check_unit_interval(c.thresholds.scaled_similarity, "scaled_similarity");
    if (c.thresholds.value_tolerance < 0.0) {
      throw ConfigError("value_tolerance must be non-negative");
    }
    if (c.thresholds.min_periods < 1) throw ConfigError("min_periods must be >= 1");
    if (c.thresholds.max_sentences < 1) throw ConfigError("max_sentences must be >= 1");
  }
  if (j.contains("sweep_thresholds")) {
    if (!j["sweep_thresholds"].is_array()) {
      throw ConfigError("sweep_thresholds must be an array");
    }
    c.sweep_thresholds.clear();
    for (const auto& jt : j["sweep_thresholds"]) {
      if (!jt.is_number()) throw ConfigError("sweep_thresholds must be numeric");
      double t = jt.get<double>();
      detail::check_unit_interval(t, "sweep threshold");
      c.sweep_thresholds.push_back(t);
    }
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.replay_dir = j.value("replay_dir", c.replay_dir);
  if (j.contains("fiscal_calendar")) {
    c.calendar = fiscal::FiscalCalendar::from_json(j["fiscal_calendar"]);
  }
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["providers"] = nlohmann::json::array();
  for (const auto& p : c.providers) j["providers"].push_back(detail::provider_to_json(p));
  j["judge"] = c.judge ? detail::provider_to_json(*c.judge) : nlohmann::json(nullptr);
  j["scorer"] = {
      {"kind", c.scorer.kind == sim::ScorerKind::cross_encoder_remote ? "remote"
                                                                      : "lexical"},
      {"endpoint", c.scorer.endpoint},
      {"model", c.scorer.model},
      {"credential_env", c.scorer.credential_env},
      {"batch_size", c.scorer.batch_size},
      {"timeout_seconds", c.scorer.timeout_seconds}};
  j["thresholds"] = {{"cluster_similarity", c.thresholds.cluster_similarity},
                     {"value_tolerance", c.thresholds.value_tolerance},
                     {"gestalt", c.thresholds.gestalt},
                     {"scaled_similarity", c.thresholds.scaled_similarity},
                     {"min_periods", c.thresholds.min_periods},
                     {"max_sentences", c.thresholds.max_sentences}};
  j["sweep_thresholds"] = c.sweep_thresholds;
  j["output_dir"] = c.output_dir;
  j["replay_dir"] = c.replay_dir;
  j["fiscal_calendar"] = c.calendar.to_json();
  return j;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  return config_from_json(j);
}

}  // namespace kpix::config
