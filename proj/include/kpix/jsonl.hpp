#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpix/aggregate.hpp"
#include "kpix/corpus.hpp"
#include "kpix/errors.hpp"
#include "kpix/extraction.hpp"
#include "kpix/filing_html.hpp"
#include "kpix/matching.hpp"
#include "kpix/metrics.hpp"

namespace kpix::jsonl {

using nlohmann::json;

// ---- per-type converters; snake_case field names, stable key order ----

inline json to_json(const corpus::TranscriptChunk& c) {
  return json{{"ticker", c.ticker},
              {"fiscal_year", c.fiscal_year},
              {"fiscal_quarter", c.fiscal_quarter},
              {"call_date", c.call_date},
              {"speaker_name", c.speaker_name},
              {"speaker_role", c.speaker_role},
              {"text", c.text},
              {"chunk_index", c.chunk_index}};
}

inline corpus::TranscriptChunk chunk_from_json(const json& j) {
  corpus::TranscriptChunk c;
  c.ticker = j.at("ticker").get<std::string>();
  c.fiscal_year = j.at("fiscal_year").get<int>();
  c.fiscal_quarter = j.at("fiscal_quarter").get<int>();
  c.call_date = j.at("call_date").get<std::string>();
  c.speaker_name = j.at("speaker_name").get<std::string>();
  c.speaker_role = j.at("speaker_role").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.chunk_index = j.at("chunk_index").get<int>();
  return c;
}

inline json to_json(const filing::FilingEntity& e) {
  json j{{"start", e.start},
         {"end", e.end},
         {"tag", e.tag},
         {"period_kind", e.period_kind},
         {"start_date", e.start_date},
         {"end_date", e.end_date},
         {"unit", e.unit}};
  j["numeric_value"] = e.numeric_value ? json(*e.numeric_value) : json(nullptr);
  return j;
}

inline filing::FilingEntity filing_entity_from_json(const json& j) {
  filing::FilingEntity e;
  e.start = j.at("start").get<size_t>();
  e.end = j.at("end").get<size_t>();
  e.tag = j.at("tag").get<std::string>();
  e.period_kind = j.value("period_kind", "");
  e.start_date = j.value("start_date", "");
  e.end_date = j.value("end_date", "");
  e.unit = j.value("unit", "");
  if (j.contains("numeric_value") && j["numeric_value"].is_number()) {
    e.numeric_value = j["numeric_value"].get<double>();
  }
  return e;
}

inline json to_json(const filing::FilingSnippet& s) {
  json entities = json::array();
  for (const auto& e : s.entities) entities.push_back(to_json(e));
  return json{{"form_type", s.form_type},
              {"accession_number", s.accession_number},
              {"filing_date", s.filing_date},
              {"quarter_ending", s.quarter_ending},
              {"company_name", s.company_name},
              {"text", s.text},
              {"entities", entities}};
}

inline filing::FilingSnippet snippet_from_json(const json& j) {
  filing::FilingSnippet s;
  s.form_type = j.value("form_type", "");
  s.accession_number = j.value("accession_number", "");
  s.filing_date = j.value("filing_date", "");
  s.quarter_ending = j.value("quarter_ending", "");
  s.company_name = j.value("company_name", "");
  s.text = j.at("text").get<std::string>();
  if (j.contains("entities")) {
    for (const auto& je : j["entities"]) s.entities.push_back(filing_entity_from_json(je));
  }
  return s;
}

inline json to_json(const extract::ChunkRef& r) {
  return json{{"ticker", r.ticker},
              {"fiscal_year", r.fiscal_year},
              {"fiscal_quarter", r.fiscal_quarter},
              {"chunk_index", r.chunk_index}};
}

inline extract::ChunkRef chunk_ref_from_json(const json& j) {
  extract::ChunkRef r;
  r.ticker = j.at("ticker").get<std::string>();
  r.fiscal_year = j.at("fiscal_year").get<int>();
  r.fiscal_quarter = j.at("fiscal_quarter").get<int>();
  r.chunk_index = j.at("chunk_index").get<int>();
  return r;
}

inline json to_json(const extract::Entity& e) {
  return json{{"text", e.text}, {"category", extract::to_string(e.category)}};
}

inline extract::Entity entity_from_json(const json& j) {
  extract::Entity e;
  e.text = j.at("text").get<std::string>();
  auto category = extract::category_from_string(j.at("category").get<std::string>());
  if (!category) {
    throw ParseError("unknown entity category: " + j["category"].dump());
  }
  e.category = *category;
  return e;
}

inline json to_json(const extract::KpiGroup& g) {
  json entities = json::array();
  for (const auto& e : g.entities) entities.push_back(to_json(e));
  json j{{"source", g.source},
         {"entities", entities},
         {"source_value", g.source_value},
         {"label", g.label},
         {"is_range", g.is_range}};
  j["value"] = g.value ? json(*g.value) : json(nullptr);
  j["value_non_numeric"] =
      g.value_non_numeric ? json(*g.value_non_numeric) : json(nullptr);
  j["top_of_range"] = g.top_of_range ? json(*g.top_of_range) : json(nullptr);
  j["bottom_of_range"] = g.bottom_of_range ? json(*g.bottom_of_range) : json(nullptr);
  return j;
}

inline extract::KpiGroup group_from_json(const json& j) {
  extract::KpiGroup g;
  g.source = j.at("source").get<std::string>();
  for (const auto& je : j.at("entities")) g.entities.push_back(entity_from_json(je));
  g.source_value = j.at("source_value").get<std::string>();
  g.label = j.at("label").get<std::string>();
  g.is_range = j.value("is_range", false);
  if (j.contains("value") && j["value"].is_number()) g.value = j["value"].get<double>();
  if (j.contains("value_non_numeric") && j["value_non_numeric"].is_string()) {
    g.value_non_numeric = j["value_non_numeric"].get<std::string>();
  }
  if (j.contains("top_of_range") && j["top_of_range"].is_number()) {
    g.top_of_range = j["top_of_range"].get<double>();
  }
  if (j.contains("bottom_of_range") && j["bottom_of_range"].is_number()) {
    g.bottom_of_range = j["bottom_of_range"].get<double>();
  }
  return g;
}

inline json to_json(const extract::ChunkExtraction& x) {
  json entities = json::array();
  for (const auto& e : x.entities) entities.push_back(to_json(e));
  json groups = json::array();
  for (const auto& g : x.groups) groups.push_back(to_json(g));
  return json{{"model_id", x.model_id},
              {"chunk_ref", to_json(x.chunk_ref)},
              {"entities", entities},
              {"groups", groups},
              {"elapsed_seconds", x.elapsed_seconds},
              {"cost_usd", x.cost_usd}};
}

inline extract::ChunkExtraction extraction_from_json(const json& j) {
  extract::ChunkExtraction x;
  x.model_id = j.at("model_id").get<std::string>();
  x.chunk_ref = chunk_ref_from_json(j.at("chunk_ref"));
  for (const auto& je : j.at("entities")) x.entities.push_back(entity_from_json(je));
  for (const auto& jg : j.at("groups")) x.groups.push_back(group_from_json(jg));
  x.elapsed_seconds = j.value("elapsed_seconds", 0.0);
  x.cost_usd = j.value("cost_usd", 0.0);
  return x;
}

inline json to_json(const matching::GoldGroup& g) {
  json entities = json::array();
  for (const auto& e : g.entities) entities.push_back(to_json(e));
  json j{{"chunk_ref", to_json(g.chunk_ref)},
         {"entities", entities},
         {"label", g.label}};
  j["value"] = g.val.is_numeric() ? json(g.val.number) : json(g.val.text);
  return j;
}

inline matching::GoldGroup gold_from_json(const json& j) {
  matching::GoldGroup g;
  g.chunk_ref = chunk_ref_from_json(j.at("chunk_ref"));
  for (const auto& je : j.at("entities")) g.entities.push_back(entity_from_json(je));
  g.label = j.at("label").get<std::string>();
  const auto& v = j.at("value");
  if (v.is_number()) {
    g.val.numeric = true;
    g.val.number = v.get<double>();
  } else if (v.is_string()) {
    g.val = value::canonical_value(v.get<std::string>());
  } else {
    throw ParseError("gold value must be a number or string");
  }
  return g;
}

inline json to_json(const fiscal::Period& p) {
  return json{{"fiscal_year", p.fiscal_year}, {"quarter", p.quarter}};
}

inline fiscal::Period period_from_json(const json& j) {
  return {j.at("fiscal_year").get<int>(), j.at("quarter").get<int>()};
}

inline json to_json(const agg::TrackedKpi& k) {
  json series = json::array();
  for (const auto& point : k.series) {
    json members = json::array();
    for (const auto& [model, label] : point.members) {
      members.push_back(json{{"model_id", model}, {"label", label}});
    }
    series.push_back(json{{"period", to_json(point.period)},
                          {"value", point.value},
                          {"model_ids", point.model_ids},
                          {"label", point.label},
                          {"members", members}});
  }
  return json{{"ticker", k.ticker},
              {"centroid_label", k.centroid_label},
              {"series", series}};
}

inline agg::TrackedKpi tracked_from_json(const json& j) {
  agg::TrackedKpi k;
  k.ticker = j.at("ticker").get<std::string>();
  k.centroid_label = j.at("centroid_label").get<std::string>();
  for (const auto& jp : j.at("series")) {
    agg::SeriesPoint point;
    point.period = period_from_json(jp.at("period"));
    point.value = jp.at("value").get<double>();
    point.model_ids = jp.at("model_ids").get<std::vector<std::string>>();
    point.label = jp.value("label", "");
    if (jp.contains("members")) {
      for (const auto& jm : jp["members"]) {
        point.members.emplace_back(jm.at("model_id").get<std::string>(),
                                   jm.at("label").get<std::string>());
      }
    }
    k.series.push_back(std::move(point));
  }
  return k;
}

inline json to_json(const metrics::F1Result& f) {
  return json{{"precision", f.precision}, {"recall", f.recall}, {"f1", f.f1}};
}

inline metrics::F1Result f1_from_json(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>()};
}

inline json to_json(const metrics::EvalReport& r) {
  json j{{"model_id", r.model_id},
         {"exact", to_json(r.exact)},
         {"semantic", to_json(r.semantic)},
         {"match", to_json(r.match)},
         {"predictions", r.predictions},
         {"golds", r.golds},
         {"matched_pairs", r.matched_pairs},
         {"skipped_chunks", r.skipped_chunks}};
  if (r.judge) {
    j["judge"] = json{{"rate", r.judge->rate},
                      {"judged_pairs", r.judge->judged_pairs},
                      {"judged_equivalent", r.judge->judged_equivalent},
                      {"parse_failures", r.judge->parse_failures},
                      {"total_golds", r.judge->total_golds}};
  } else {
    j["judge"] = nullptr;
  }
  return j;
}

inline metrics::EvalReport eval_report_from_json(const json& j) {
  metrics::EvalReport r;
  r.model_id = j.at("model_id").get<std::string>();
  r.exact = f1_from_json(j.at("exact"));
  r.semantic = f1_from_json(j.at("semantic"));
  r.match = f1_from_json(j.at("match"));
  r.predictions = j.value("predictions", size_t{0});
  r.golds = j.value("golds", size_t{0});
  r.matched_pairs = j.value("matched_pairs", size_t{0});
  r.skipped_chunks = j.value("skipped_chunks", size_t{0});
  if (j.contains("judge") && j["judge"].is_object()) {
    metrics::JudgeOutcome o;
    o.rate = j["judge"].value("rate", 0.0);
    o.judged_pairs = j["judge"].value("judged_pairs", 0);
    o.judged_equivalent = j["judge"].value("judged_equivalent", 0);
    o.parse_failures = j["judge"].value("parse_failures", 0);
    o.total_golds = j["judge"].value("total_golds", 0);
    r.judge = o;
  }
  return r;
}

// ---- JSON-lines files with a schema header line ----

/// Writes one artifact file: a header line {"schema": ..., "version": ...}
/// followed by one compact JSON record per line. Key order inside records
/// is lexicographic (the JSON library sorts object keys), so equal data
/// produces byte-identical files.
inline void write_jsonl(const std::filesystem::path& path, const std::string& schema,
                        int version, const std::vector<json>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << json{{"schema", schema}, {"version", version}}.dump() << "\n";
  for (const auto& record : records) out << record.dump() << "\n";
}

/// Reads an artifact file back, validating the header's schema name.
inline std::vector<json> read_jsonl(const std::filesystem::path& path,
                                    const std::string& expected_schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + " is empty; expected a schema header");
  }
  auto header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || !header.contains("schema")) {
    throw ParseError(path.string() + " lacks a schema header line");
  }
  if (header["schema"] != expected_schema) {
    throw ParseError(path.string() + " has schema " + header["schema"].dump() +
                     ", expected \"" + expected_schema + "\"");
  }
  std::vector<json> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       " is not valid JSON");
    }
    records.push_back(std::move(record));
  }
  return records;
}

inline constexpr const char* kChunkSchema = "transcript_chunks";
inline constexpr const char* kSnippetSchema = "filing_snippets";
inline constexpr const char* kExtractionSchema = "chunk_extractions";
inline constexpr const char* kGoldSchema = "gold_groups";
inline constexpr const char* kMatchSchema = "match_reports";
inline constexpr const char* kTrackedSchema = "tracked_kpis";

}  // namespace kpix::jsonl
