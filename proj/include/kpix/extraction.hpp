#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "kpix/corpus.hpp"
#include "kpix/errors.hpp"
#include "kpix/prompts.hpp"
#include "kpix/text.hpp"
#include "kpix/value.hpp"

namespace kpix::extract {

enum class EntityCategory { kpi_name, kpi_value, qualitative_desc, scope, date, modality };

inline const char* to_string(EntityCategory c) {
  switch (c) {
    case EntityCategory::kpi_name: return "kpi_name";
    case EntityCategory::kpi_value: return "kpi_value";
    case EntityCategory::qualitative_desc: return "qualitative_desc";
    case EntityCategory::scope: return "scope";
    case EntityCategory::date: return "date";
    case EntityCategory::modality: return "modality";
  }
  return "kpi_name";
}

inline std::optional<EntityCategory> category_from_string(std::string_view s) {
  if (s == "kpi_name") return EntityCategory::kpi_name;
  if (s == "kpi_value") return EntityCategory::kpi_value;
  if (s == "qualitative_desc") return EntityCategory::qualitative_desc;
  if (s == "scope") return EntityCategory::scope;
  if (s == "date") return EntityCategory::date;
  if (s == "modality") return EntityCategory::modality;
  return std::nullopt;
}

struct Entity {
  std::string text;
  EntityCategory category = EntityCategory::kpi_name;

  bool operator==(const Entity&) const = default;
};

struct KpiGroup {
  std::string source;
  std::vector<Entity> entities;
  std::string source_value;
  std::string label;
  std::optional<double> value;
  std::optional<std::string> value_non_numeric;
  bool is_range = false;
  std::optional<double> top_of_range;
  std::optional<double> bottom_of_range;

  bool operator==(const KpiGroup&) const = default;
};

/// Identity of one transcript chunk across pipeline stages.
struct ChunkRef {
  std::string ticker;
  int fiscal_year = 0;
  int fiscal_quarter = 0;
  int chunk_index = 0;

  auto operator<=>(const ChunkRef&) const = default;

  std::string str() const {
    return ticker + "/FY" + std::to_string(fiscal_year) + "Q" +
           std::to_string(fiscal_quarter) + "#" + std::to_string(chunk_index);
  }
};

inline ChunkRef ref_of(const corpus::TranscriptChunk& chunk) {
  return {chunk.ticker, chunk.fiscal_year, chunk.fiscal_quarter, chunk.chunk_index};
}

struct ChunkExtraction {
  std::string model_id;
  ChunkRef chunk_ref;
  std::vector<Entity> entities;
  std::vector<KpiGroup> groups;
  double elapsed_seconds = 0.0;
  double cost_usd = 0.0;
};

/// Renders the extraction prompt for one chunk. The template must contain
/// all four placeholders ($tickr, $fiscal_period, $time_of_report,
/// $target_text); each occurrence is replaced and substituted values are
/// never rescanned, so chunk text containing a placeholder stays inert.
inline std::string build_prompt(const corpus::TranscriptChunk& chunk,
                                std::string_view prompt_template =
                                    prompts::kExtractionPromptTemplate) {
  struct Placeholder {
    std::string_view token;
    std::string value;
  };
  const Placeholder placeholders[] = {
      {"$fiscal_period", "FY" + std::to_string(chunk.fiscal_year) + " Q" +
                             std::to_string(chunk.fiscal_quarter)},
      {"$time_of_report", chunk.call_date},
      {"$target_text", chunk.text},
      {"$tickr", chunk.ticker},
  };
  for (const auto& p : placeholders) {
    if (prompt_template.find(p.token) == std::string_view::npos) {
      throw ConfigError("prompt template is missing placeholder " +
                        std::string(p.token));
    }
  }
  std::string out;
  out.reserve(prompt_template.size() + chunk.text.size());
  size_t i = 0;
  while (i < prompt_template.size()) {
    if (prompt_template[i] == '$') {
      bool replaced = false;
      for (const auto& p : placeholders) {
        if (starts_with(prompt_template.substr(i), p.token)) {
          out += p.value;
          i += p.token.size();
          replaced = true;
          break;
        }
      }
      if (replaced) continue;
    }
    out.push_back(prompt_template[i++]);
  }
  return out;
}

struct ExtractionPayload {
  std::vector<Entity> entities;
  std::vector<KpiGroup> groups;
  int dropped_groups = 0;    // structurally invalid groups discarded
  int dropped_entities = 0;  // malformed chunk-level entities discarded
};

namespace detail {

/// Finds the first balanced JSON object embedded in free text (models wrap
/// responses in code fences or prose). Returns npos..npos when none parses.
inline std::pair<size_t, size_t> find_json_object(std::string_view raw) {
  for (size_t start = raw.find('{'); start != std::string_view::npos;
       start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          auto candidate = raw.substr(start, i - start + 1);
          auto parsed = nlohmann::json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) {
            return {start, i + 1};
          }
          break;
        }
      }
    }
  }
  return {std::string_view::npos, std::string_view::npos};
}

inline std::optional<Entity> parse_entity(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  auto ti = j.find("text");
  auto ci = j.find("category");
  if (ti == j.end() || ci == j.end() || !ti->is_string() || !ci->is_string()) {
    return std::nullopt;
  }
  auto category = category_from_string(ci->get<std::string>());
  if (!category) return std::nullopt;
  Entity e;
  e.text = ti->get<std::string>();
  e.category = *category;
  if (e.text.empty()) return std::nullopt;
  return e;
}

inline std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) return std::nullopt;
  return it->get<double>();
}

/// Reads "Source Value" with a tolerant fallback to "Source_Value".
inline const nlohmann::json* find_source_value(const nlohmann::json& j) {
  auto it = j.find("Source Value");
  if (it != j.end()) return &*it;
  it = j.find("Source_Value");
  if (it != j.end()) return &*it;
  return nullptr;
}

inline bool group_invariants_hold(const KpiGroup& g) {
  bool has_value = g.value.has_value();
  bool has_non_numeric = g.value_non_numeric.has_value();
  if (has_value == has_non_numeric) return false;
  if (g.is_range) {
    if (!has_value || !g.top_of_range || !g.bottom_of_range) return false;
    if (*g.bottom_of_range > *g.top_of_range) return false;
    double mid = (*g.top_of_range + *g.bottom_of_range) / 2.0;
    if (std::fabs(*g.value - mid) > 1e-6 * std::max(1.0, std::fabs(*g.value))) {
      return false;
    }
  } else {
    if (g.top_of_range || g.bottom_of_range) return false;
  }
  for (const auto& e : g.entities) {
    if (g.source.find(e.text) == std::string::npos) return false;
  }
  return true;
}

}  // namespace detail

/// Parses a raw model response into entities and groups. Tolerant on the
/// outside (the first balanced JSON object found in the text is used, so
/// code fences and surrounding prose are fine) and strict on the inside:
/// no JSON object at all raises ParseError, an object without both
/// "Entities" and "Groups" raises SchemaError, and each group must carry
/// exactly one of Value/Value_NonNumeric, internally consistent range
/// fields, and entity texts that occur in its source span. Violating groups
/// are dropped and counted, never fatal. Group entities absent from the
/// chunk-level list are appended to it so the result's entity list always
/// covers its groups.
inline ExtractionPayload parse_extraction_response(std::string_view raw) {
  auto [start, end] = detail::find_json_object(raw);
  if (start == std::string_view::npos) {
    throw ParseError("response contains no JSON object");
  }
  auto j = nlohmann::json::parse(raw.substr(start, end - start));
  if (!j.contains("Entities") || !j.contains("Groups")) {
    throw SchemaError("response object lacks Entities/Groups");
  }
  if (!j["Entities"].is_array() || !j["Groups"].is_array()) {
    throw SchemaError("Entities/Groups must be arrays");
  }

  ExtractionPayload out;
  for (const auto& je : j["Entities"]) {
    if (auto e = detail::parse_entity(je)) {
      out.entities.push_back(std::move(*e));
    } else {
      ++out.dropped_entities;
    }
  }
  for (const auto& jg : j["Groups"]) {
    if (!jg.is_object()) {
      ++out.dropped_groups;
      continue;
    }
    KpiGroup g;
    auto src = jg.find("Source");
    auto label = jg.find("Label");
    const nlohmann::json* source_value = detail::find_source_value(jg);
    if (src == jg.end() || !src->is_string() || label == jg.end() ||
        !label->is_string() || source_value == nullptr || !source_value->is_string()) {
      ++out.dropped_groups;
      continue;
    }
    g.source = src->get<std::string>();
    g.label = label->get<std::string>();
    g.source_value = source_value->get<std::string>();
    bool entities_ok = true;
    if (auto ents = jg.find("Entities"); ents != jg.end() && ents->is_array()) {
      for (const auto& je : *ents) {
        if (auto e = detail::parse_entity(je)) {
          g.entities.push_back(std::move(*e));
        } else {
          entities_ok = false;
          break;
        }
      }
    }
    g.value = detail::opt_number(jg, "Value");
    if (auto it = jg.find("Value_NonNumeric"); it != jg.end() && it->is_string()) {
      g.value_non_numeric = it->get<std::string>();
    }
    if (auto it = jg.find("Is_Range"); it != jg.end() && it->is_boolean()) {
      g.is_range = it->get<bool>();
    }
    g.top_of_range = detail::opt_number(jg, "Top_of_range");
    g.bottom_of_range = detail::opt_number(jg, "Bottom_of_range");

    if (!entities_ok || !detail::group_invariants_hold(g)) {
      ++out.dropped_groups;
      continue;
    }
    for (const auto& e : g.entities) {
      if (std::find(out.entities.begin(), out.entities.end(), e) ==
          out.entities.end()) {
        out.entities.push_back(e);
      }
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

/// Serializes entities and groups back to the response wire format, the
/// inverse of parse_extraction_response for valid payloads.
inline std::string serialize_extraction_payload(const std::vector<Entity>& entities,
                                                const std::vector<KpiGroup>& groups) {
  nlohmann::json j;
  j["Entities"] = nlohmann::json::array();
  for (const auto& e : entities) {
    j["Entities"].push_back({{"text", e.text}, {"category", to_string(e.category)}});
  }
  j["Groups"] = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json jg;
    jg["Source"] = g.source;
    jg["Entities"] = nlohmann::json::array();
    for (const auto& e : g.entities) {
      jg["Entities"].push_back({{"text", e.text}, {"category", to_string(e.category)}});
    }
    jg["Source Value"] = g.source_value;
    jg["Label"] = g.label;
    jg["Value"] = g.value ? nlohmann::json(*g.value) : nlohmann::json(nullptr);
    jg["Value_NonNumeric"] =
        g.value_non_numeric ? nlohmann::json(*g.value_non_numeric) : nlohmann::json(nullptr);
    jg["Is_Range"] = g.is_range;
    jg["Top_of_range"] =
        g.top_of_range ? nlohmann::json(*g.top_of_range) : nlohmann::json(nullptr);
    jg["Bottom_of_range"] =
        g.bottom_of_range ? nlohmann::json(*g.bottom_of_range) : nlohmann::json(nullptr);
    j["Groups"].push_back(std::move(jg));
  }
  return j.dump(2);
}

namespace detail {

inline int category_rank(EntityCategory c) {
  switch (c) {
    case EntityCategory::scope: return 0;
    case EntityCategory::modality: return 1;
    case EntityCategory::kpi_name: return 2;
    case EntityCategory::date: return 3;
    default: return -1;  // not a label part
  }
}

}  // namespace detail

/// Checks a group's label against the construction rule: every segment must
/// be the text of one of the group's scope/modality/kpi_name/date entities
/// (case-insensitively), joined by single spaces, in non-descending
/// precedence order scope < modality < kpi_name < date. Returns one message
/// per violation; a clean label yields an empty list.
inline std::vector<std::string> validate_label(const KpiGroup& group) {
  std::vector<std::string> violations;
  std::string label = collapse_ws(group.label);
  if (label.empty()) {
    violations.push_back("label is empty");
    return violations;
  }
  struct Part {
    std::string text;
    int rank;
  };
  std::vector<Part> parts;
  for (const auto& e : group.entities) {
    int rank = detail::category_rank(e.category);
    if (rank >= 0) parts.push_back({collapse_ws(e.text), rank});
  }
  // Longest-match-first greedy segmentation.
  std::sort(parts.begin(), parts.end(),
            [](const Part& a, const Part& b) { return a.text.size() > b.text.size(); });
  std::string_view rest = label;
  int last_rank = -1;
  while (!rest.empty()) {
    const Part* matched = nullptr;
    for (const auto& p : parts) {
      if (p.text.empty() || p.text.size() > rest.size()) continue;
      if (!iequals(rest.substr(0, p.text.size()), p.text)) continue;
      if (rest.size() > p.text.size() && rest[p.text.size()] != ' ') continue;
      matched = &p;
      break;
    }
    if (matched == nullptr) {
      auto word_end = rest.find(' ');
      std::string_view word = rest.substr(0, word_end);
      violations.push_back("label segment not drawn from group entities: '" +
                           std::string(word) + "'");
      rest = word_end == std::string_view::npos ? std::string_view{}
                                                : rest.substr(word_end + 1);
      continue;
    }
    if (matched->rank < last_rank) {
      violations.push_back("label part '" + matched->text +
                           "' is out of precedence order");
    }
    last_rank = std::max(last_rank, matched->rank);
    rest = rest.size() > matched->text.size() ? rest.substr(matched->text.size() + 1)
                                              : std::string_view{};
  }
  return violations;
}

}  // namespace kpix::extract
