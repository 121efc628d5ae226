#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kpix/aggregate.hpp"
#include "kpix/config.hpp"
#include "kpix/corpus.hpp"
#include "kpix/errors.hpp"
#include "kpix/extraction.hpp"
#include "kpix/filing_html.hpp"
#include "kpix/jsonl.hpp"
#include "kpix/matching.hpp"
#include "kpix/metrics.hpp"
#include "kpix/prompts.hpp"
#include "kpix/provider.hpp"

namespace kpix::pipe {

namespace fs = std::filesystem;

/// Runs fn(0..count) on a small thread pool. fn must handle its own errors;
/// an escaping exception would terminate.
template <typename Fn>
void parallel_for(size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  workers = std::clamp<int>(workers, 1, static_cast<int>(count));
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  }
  for (auto& t : threads) t.join();
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sanitize_model_id(const std::string& model_id) {
  std::string out;
  for (char c : model_id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                          c == '_' || c == '-'
                      ? c
                      : '_');
  }
  return out;
}

inline fs::path extraction_path(const fs::path& out_dir, const std::string& model_id) {
  return out_dir / ("extractions_" + sanitize_model_id(model_id) + ".jsonl");
}

/// "TICKER_YYYY_Qn_YYYY-MM-DD" call-file naming convention.
inline std::optional<corpus::CallMetadata> parse_call_filename(const std::string& stem) {
  static const std::regex kPattern(
      R"(^([A-Za-z][A-Za-z.\-]*)_(\d{4})_[Qq]([1-4])_(\d{4}-\d{2}-\d{2})$)");
  std::smatch m;
  if (!std::regex_match(stem, m, kPattern)) return std::nullopt;
  corpus::CallMetadata meta;
  meta.ticker = m.str(1);
  meta.fiscal_year = std::stoi(m.str(2));
  meta.fiscal_quarter = std::stoi(m.str(3));
  meta.call_date = m.str(4);
  return meta;
}

struct IngestResult {
  size_t transcripts_ok = 0;
  size_t filings_ok = 0;
  size_t files_failed = 0;
  size_t chunks = 0;
  size_t snippets = 0;
  std::vector<std::string> errors;

  int exit_code() const { return files_failed == 0 ? 0 : 1; }
};

namespace detail {

inline std::optional<nlohmann::json> read_sidecar(const fs::path& input) {
  fs::path sidecar = input;
  sidecar += ".meta.json";
  if (!fs::exists(sidecar)) return std::nullopt;
  auto j = nlohmann::json::parse(read_file(sidecar), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw InputError(sidecar.string() + " is not a JSON object");
  }
  return j;
}

inline corpus::CallMetadata call_metadata_for(const fs::path& input) {
  corpus::CallMetadata meta;
  if (auto stem_meta = parse_call_filename(input.stem().string())) {
    meta = *stem_meta;
  }
  if (auto sidecar = read_sidecar(input)) {
    meta.ticker = sidecar->value("ticker", meta.ticker);
    meta.fiscal_year = sidecar->value("fiscal_year", meta.fiscal_year);
    meta.fiscal_quarter = sidecar->value("fiscal_quarter", meta.fiscal_quarter);
    meta.call_date = sidecar->value("call_date", meta.call_date);
  }
  if (meta.ticker.empty() || meta.fiscal_year <= 0) {
    throw InputError(input.string() +
                     ": call metadata missing; name the file "
                     "TICKER_YYYY_Qn_YYYY-MM-DD.txt or add a .meta.json sidecar");
  }
  return meta;
}

inline filing::FilingMetadata filing_metadata_for(const fs::path& input) {
  filing::FilingMetadata meta;
  if (auto sidecar = read_sidecar(input)) {
    meta.form_type = sidecar->value("form_type", "");
    meta.accession_number = sidecar->value("accession_number", "");
    meta.filing_date = sidecar->value("filing_date", "");
    meta.quarter_ending = sidecar->value("quarter_ending", "");
    meta.company_name = sidecar->value("company_name", "");
  }
  if (meta.accession_number.empty()) meta.accession_number = input.stem().string();
  return meta;
}

}  // namespace detail

/// Ingests transcripts (.txt) and filing HTML (.htm/.html) into the chunk
/// and snippet artifacts. Directories are walked recursively; inputs are
/// processed in sorted path order and outputs are sorted, so the artifacts
/// are byte-identical however the inputs were listed. The filing length
/// filter runs over the whole ingested batch.
inline IngestResult cmd_ingest(const std::vector<fs::path>& inputs,
                               const config::PipelineConfig& config,
                               std::ostream& log = std::cerr) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::recursive_directory_iterator(input)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
    } else {
      files.push_back(input);
    }
  }
  std::sort(files.begin(), files.end());

  IngestResult result;
  std::vector<corpus::TranscriptChunk> chunks;
  struct PendingFiling {
    filing::FilingMetadata meta;
    std::vector<std::string> texts;
  };
  std::vector<PendingFiling> filings;

  for (const auto& file : files) {
    std::string ext = to_lower(file.extension().string());
    try {
      if (ext == ".txt") {
        auto meta = detail::call_metadata_for(file);
        auto file_chunks = corpus::segment_transcript(
            read_file(file), meta, config.thresholds.max_sentences);
        chunks.insert(chunks.end(), file_chunks.begin(), file_chunks.end());
        ++result.transcripts_ok;
      } else if (ext == ".htm" || ext == ".html") {
        PendingFiling pending;
        pending.meta = detail::filing_metadata_for(file);
        pending.texts = filing::dedupe_and_filter(
            filing::extract_candidates(read_file(file)));
        filings.push_back(std::move(pending));
        ++result.filings_ok;
      }
      // other extensions (sidecars included) are not inputs
    } catch (const std::exception& e) {
      ++result.files_failed;
      result.errors.push_back(file.string() + ": " + e.what());
      log << "ingest: " << file.string() << ": " << e.what() << "\n";
    }
  }

  // Length statistics pool over every filing ingested together.
  std::vector<std::string> all_texts;
  for (const auto& f : filings) {
    all_texts.insert(all_texts.end(), f.texts.begin(), f.texts.end());
  }
  double cutoff = filing::length_cutoff(all_texts);
  std::vector<filing::FilingSnippet> snippets;
  for (const auto& f : filings) {
    for (const auto& text : f.texts) {
      if (static_cast<double>(text.size()) > cutoff) continue;
      if (text.size() > filing::kMaxSnippetChars) continue;
      filing::FilingSnippet s;
      s.form_type = f.meta.form_type;
      s.accession_number = f.meta.accession_number;
      s.filing_date = f.meta.filing_date;
      s.quarter_ending = f.meta.quarter_ending;
      s.company_name = f.meta.company_name;
      s.entities = filing::tag_snippet_entities(text);
      s.text = text;
      snippets.push_back(std::move(s));
    }
  }

  std::sort(chunks.begin(), chunks.end(),
            [](const corpus::TranscriptChunk& a, const corpus::TranscriptChunk& b) {
              return extract::ref_of(a) < extract::ref_of(b);
            });
  std::sort(snippets.begin(), snippets.end(),
            [](const filing::FilingSnippet& a, const filing::FilingSnippet& b) {
              return std::tie(a.accession_number, a.filing_date, a.text) <
                     std::tie(b.accession_number, b.filing_date, b.text);
            });

  fs::path out_dir = config.output_dir;
  std::vector<nlohmann::json> chunk_rows, snippet_rows;
  for (const auto& c : chunks) chunk_rows.push_back(jsonl::to_json(c));
  for (const auto& s : snippets) snippet_rows.push_back(jsonl::to_json(s));
  jsonl::write_jsonl(out_dir / "chunks.jsonl", jsonl::kChunkSchema, 1, chunk_rows);
  jsonl::write_jsonl(out_dir / "snippets.jsonl", jsonl::kSnippetSchema, 1, snippet_rows);

  result.chunks = chunks.size();
  result.snippets = snippets.size();
  log << "ingest: " << result.transcripts_ok << " transcripts -> " << result.chunks
      << " chunks, " << result.filings_ok << " filings -> " << result.snippets
      << " snippets, " << result.files_failed << " failed\n";
  return result;
}

namespace detail {

inline std::vector<provider::ProviderConfig> select_providers(
    const config::PipelineConfig& config, const std::vector<std::string>& models) {
  if (config.providers.empty()) {
    throw ConfigError("no providers configured");
  }
  if (models.empty()) return config.providers;
  std::vector<provider::ProviderConfig> out;
  for (const auto& name : models) {
    bool found = false;
    for (const auto& p : config.providers) {
      if (p.model_id == name) {
        out.push_back(p);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown model in --models: " + name);
  }
  return out;
}

struct ExtractionFile {
  std::map<extract::ChunkRef, extract::ChunkExtraction> ok;
  std::map<extract::ChunkRef, nlohmann::json> failed;
};

inline ExtractionFile load_extraction_file(const fs::path& path) {
  ExtractionFile out;
  for (const auto& row : jsonl::read_jsonl(path, jsonl::kExtractionSchema)) {
    if (row.value("failed", false)) {
      out.failed[jsonl::chunk_ref_from_json(row.at("chunk_ref"))] = row;
    } else {
      auto x = jsonl::extraction_from_json(row);
      out.ok[x.chunk_ref] = std::move(x);
    }
  }
  return out;
}

}  // namespace detail

struct ModelExtractStats {
  std::string model_id;
  size_t ok = 0;
  size_t failed = 0;
  size_t reused = 0;  // rows kept from a previous run
  double cost_usd = 0.0;
  double elapsed_seconds = 0.0;
};

struct ExtractResult {
  std::vector<ModelExtractStats> models;

  int exit_code() const {
    for (const auto& m : models) {
      if (m.failed > 0) return 1;
    }
    return 0;
  }
};

/// Runs extraction for every selected provider over the ingested chunks.
/// Each provider's requests run on its own worker pool; per-chunk failures
/// are recorded as failed rows and never abort the run. Reruns reuse
/// successful rows already on disk and retry only the failed or missing
/// chunks. Output rows are sorted by chunk ref.
inline ExtractResult cmd_extract(const config::PipelineConfig& config,
                                 const std::vector<std::string>& models = {},
                                 const std::string& replay_dir_override = {},
                                 std::ostream& log = std::cerr) {
  fs::path out_dir = config.output_dir;
  std::string replay_dir =
      replay_dir_override.empty() ? config.replay_dir : replay_dir_override;

  std::vector<corpus::TranscriptChunk> chunks;
  for (const auto& row : jsonl::read_jsonl(out_dir / "chunks.jsonl", jsonl::kChunkSchema)) {
    chunks.push_back(jsonl::chunk_from_json(row));
  }
  std::sort(chunks.begin(), chunks.end(),
            [](const corpus::TranscriptChunk& a, const corpus::TranscriptChunk& b) {
              return extract::ref_of(a) < extract::ref_of(b);
            });
  const nlohmann::json schema = prompts::default_extraction_schema();

  ExtractResult result;
  for (const auto& provider_config : detail::select_providers(config, models)) {
    auto handle = provider::make_provider(provider_config, replay_dir);
    ModelExtractStats stats;
    stats.model_id = provider_config.model_id;

    fs::path path = extraction_path(out_dir, provider_config.model_id);
    detail::ExtractionFile previous;
    if (fs::exists(path)) previous = detail::load_extraction_file(path);

    std::vector<size_t> pending;
    for (size_t i = 0; i < chunks.size(); ++i) {
      if (!previous.ok.count(extract::ref_of(chunks[i]))) pending.push_back(i);
    }
    stats.reused = chunks.size() - pending.size();

    struct Outcome {
      std::optional<extract::ChunkExtraction> extraction;
      std::string error;
    };
    std::vector<Outcome> outcomes(pending.size());
    parallel_for(pending.size(), provider_config.parallelism, [&](size_t task) {
      const auto& chunk = chunks[pending[task]];
      try {
        std::string prompt = extract::build_prompt(chunk);
        auto completion = handle->complete(prompt, &schema);
        auto payload = extract::parse_extraction_response(completion.text);
        extract::ChunkExtraction x;
        x.model_id = provider_config.model_id;
        x.chunk_ref = extract::ref_of(chunk);
        x.entities = std::move(payload.entities);
        x.groups = std::move(payload.groups);
        x.elapsed_seconds = completion.elapsed_seconds;
        x.cost_usd = completion.cost_usd;
        outcomes[task].extraction = std::move(x);
      } catch (const std::exception& e) {
        outcomes[task].error = e.what();
      }
    });

    std::map<extract::ChunkRef, nlohmann::json> rows;
    for (const auto& [ref, extraction] : previous.ok) {
      rows[ref] = jsonl::to_json(extraction);
    }
    for (size_t task = 0; task < pending.size(); ++task) {
      const auto& chunk = chunks[pending[task]];
      auto ref = extract::ref_of(chunk);
      if (outcomes[task].extraction) {
        stats.cost_usd += outcomes[task].extraction->cost_usd;
        stats.elapsed_seconds += outcomes[task].extraction->elapsed_seconds;
        rows[ref] = jsonl::to_json(*outcomes[task].extraction);
        ++stats.ok;
      } else {
        rows[ref] = nlohmann::json{{"chunk_ref", jsonl::to_json(ref)},
                                   {"model_id", provider_config.model_id},
                                   {"failed", true},
                                   {"error", outcomes[task].error}};
        ++stats.failed;
        log << "extract: " << provider_config.model_id << " " << ref.str() << ": "
            << outcomes[task].error << "\n";
      }
    }
    std::vector<nlohmann::json> ordered;
    ordered.reserve(rows.size());
    for (auto& [ref, row] : rows) ordered.push_back(std::move(row));
    jsonl::write_jsonl(path, jsonl::kExtractionSchema, 1, ordered);

    log << "extract: " << provider_config.model_id << ": " << stats.ok << " ok, "
        << stats.failed << " failed, " << stats.reused << " reused, cost $"
        << stats.cost_usd << "\n";
    result.models.push_back(std::move(stats));
  }
  return result;
}

struct EvaluateResult {
  std::vector<metrics::EvalReport> reports;
  std::vector<std::string> errors;

  int exit_code() const { return errors.empty() ? 0 : 1; }
};

inline void print_eval_table(const std::vector<metrics::EvalReport>& reports,
                             std::ostream& out) {
  out << std::left << std::setw(24) << "model" << std::right << std::setw(9)
      << "exact_p" << std::setw(9) << "exact_r" << std::setw(9) << "exact_f1"
      << std::setw(9) << "sem_p" << std::setw(9) << "sem_r" << std::setw(9)
      << "sem_f1" << std::setw(9) << "match_p" << std::setw(9) << "match_r"
      << std::setw(9) << "match_f1" << std::setw(9) << "judge" << "\n";
  out << std::string(24 + 9 * 10, '-') << "\n";
  auto pct = [](double v) { return 100.0 * v; };
  for (const auto& r : reports) {
    out << std::left << std::setw(24) << r.model_id << std::right << std::fixed
        << std::setprecision(2);
    out << std::setw(9) << pct(r.exact.precision) << std::setw(9)
        << pct(r.exact.recall) << std::setw(9) << pct(r.exact.f1);
    out << std::setw(9) << pct(r.semantic.precision) << std::setw(9)
        << pct(r.semantic.recall) << std::setw(9) << pct(r.semantic.f1);
    out << std::setw(9) << pct(r.match.precision) << std::setw(9)
        << pct(r.match.recall) << std::setw(9) << pct(r.match.f1);
    if (r.judge) {
      out << std::setw(9) << pct(r.judge->rate);
    } else {
      out << std::setw(9) << "-";
    }
    out << "\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
}

/// Scores every selected model's extractions against the gold groups.
/// Chunks present on only one side are listed to stderr and excluded from
/// the pooled metrics; metrics pool corpus-wide over the common chunks.
inline EvaluateResult cmd_evaluate(const config::PipelineConfig& config,
                                   const fs::path& gold_path,
                                   const std::vector<std::string>& models = {},
                                   const std::string& replay_dir_override = {},
                                   std::ostream& log = std::cerr) {
  fs::path out_dir = config.output_dir;
  std::string replay_dir =
      replay_dir_override.empty() ? config.replay_dir : replay_dir_override;
  auto scorer = sim::make_scorer(config.scorer);

  std::map<extract::ChunkRef, std::vector<matching::GoldGroup>> gold_by_ref;
  for (const auto& row : jsonl::read_jsonl(gold_path, jsonl::kGoldSchema)) {
    auto gold = jsonl::gold_from_json(row);
    gold_by_ref[gold.chunk_ref].push_back(std::move(gold));
  }

  std::map<extract::ChunkRef, std::string> chunk_text;
  fs::path chunks_path = out_dir / "chunks.jsonl";
  if (fs::exists(chunks_path)) {
    for (const auto& row : jsonl::read_jsonl(chunks_path, jsonl::kChunkSchema)) {
      auto chunk = jsonl::chunk_from_json(row);
      chunk_text[extract::ref_of(chunk)] = chunk.text;
    }
  }

  EvaluateResult result;
  for (const auto& provider_config : detail::select_providers(config, models)) {
    fs::path path = extraction_path(out_dir, provider_config.model_id);
    if (!fs::exists(path)) {
      result.errors.push_back("no extractions for model " + provider_config.model_id);
      log << "evaluate: missing " << path.string() << "\n";
      continue;
    }
    auto extractions = detail::load_extraction_file(path);

    // Chunk refs must appear on both sides to enter the pooled metrics.
    std::set<extract::ChunkRef> common;
    size_t skipped = 0;
    for (const auto& [ref, unused] : extractions.ok) {
      if (gold_by_ref.count(ref)) {
        common.insert(ref);
      } else {
        ++skipped;
        log << "evaluate: " << provider_config.model_id << ": " << ref.str()
            << " has extractions but no gold; skipped\n";
      }
    }
    for (const auto& [ref, unused] : gold_by_ref) {
      if (!extractions.ok.count(ref)) {
        ++skipped;
        log << "evaluate: " << provider_config.model_id << ": " << ref.str()
            << " has gold but no extraction; skipped\n";
      }
    }

    size_t total_preds = 0, total_golds = 0, exact_matches = 0, total_pairs = 0;
    metrics::SumPair semantic_sums, match_sums;
    std::deque<std::vector<extract::KpiGroup>> pred_store;
    std::deque<std::vector<matching::GoldGroup>> gold_store;
    std::deque<matching::MatchReport> report_store;
    std::vector<metrics::JudgeInstance> judge_instances;
    std::vector<nlohmann::json> match_rows;
    matching::MatchOptions match_opts;
    match_opts.scaled_similarity_gate = config.thresholds.scaled_similarity;
    match_opts.gestalt_gate = config.thresholds.gestalt;

    for (const auto& ref : common) {
      pred_store.push_back(matching::dedupe_supersets(extractions.ok.at(ref).groups));
      gold_store.push_back(matching::dedupe_supersets(gold_by_ref.at(ref)));
      const auto& preds = pred_store.back();
      const auto& golds = gold_store.back();
      report_store.push_back(matching::align(preds, golds, *scorer, match_opts));
      const auto& report = report_store.back();

      total_preds += preds.size();
      total_golds += golds.size();
      total_pairs += report.pairs.size();
      exact_matches += metrics::exact_match_count(preds, golds);
      auto sem = metrics::semantic_sums(preds, golds, *scorer);
      semantic_sums.pred_sum += sem.pred_sum;
      semantic_sums.gold_sum += sem.gold_sum;
      auto mat = metrics::match_sums(report);
      match_sums.pred_sum += mat.pred_sum;
      match_sums.gold_sum += mat.gold_sum;

      nlohmann::json pairs = nlohmann::json::array();
      for (const auto& pair : report.pairs) {
        pairs.push_back({{"pred_index", pair.pred_index},
                         {"gold_index", pair.gold_index},
                         {"kind", matching::to_string(pair.kind)},
                         {"label_similarity", pair.label_similarity}});
      }
      match_rows.push_back({{"chunk_ref", jsonl::to_json(ref)},
                            {"pairs", pairs},
                            {"unmatched_predictions", report.unmatched_predictions},
                            {"unmatched_golds", report.unmatched_golds}});

      metrics::JudgeInstance inst;
      auto text = chunk_text.find(ref);
      inst.context_text = text == chunk_text.end() ? "" : text->second;
      inst.preds = &pred_store.back();
      inst.golds = &gold_store.back();
      inst.report = &report_store.back();
      judge_instances.push_back(inst);
    }

    metrics::EvalReport report;
    report.model_id = provider_config.model_id;
    report.predictions = total_preds;
    report.golds = total_golds;
    report.matched_pairs = total_pairs;
    report.skipped_chunks = skipped;
    report.exact = metrics::pooled_f1(static_cast<double>(exact_matches),
                                      static_cast<double>(exact_matches),
                                      total_preds, total_golds);
    report.semantic = metrics::pooled_f1(semantic_sums.pred_sum,
                                         semantic_sums.gold_sum, total_preds,
                                         total_golds);
    report.match = metrics::pooled_f1(match_sums.pred_sum, match_sums.gold_sum,
                                      total_preds, total_golds);
    if (config.judge) {
      try {
        auto judge = provider::make_provider(*config.judge, replay_dir);
        report.judge = metrics::judge_rate(judge_instances, *judge);
      } catch (const std::exception& e) {
        result.errors.push_back("judge failed for " + provider_config.model_id + ": " +
                                e.what());
        log << "evaluate: judge failed: " << e.what() << "\n";
      }
    }

    jsonl::write_jsonl(out_dir / ("matches_" +
                                  sanitize_model_id(provider_config.model_id) +
                                  ".jsonl"),
                       jsonl::kMatchSchema, 1, match_rows);
    std::ofstream report_out(out_dir / ("eval_" +
                                        sanitize_model_id(provider_config.model_id) +
                                        ".json"),
                             std::ios::binary | std::ios::trunc);
    report_out << jsonl::to_json(report).dump(2) << "\n";
    result.reports.push_back(std::move(report));
  }
  return result;
}

struct TrackResult {
  size_t items = 0;
  size_t clusters = 0;
  size_t tracked_kpis = 0;
  size_t warned_periods = 0;
  std::optional<agg::SweepResult> sweep;
  std::vector<std::string> errors;

  int exit_code() const { return errors.empty() ? 0 : 1; }
};

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

/// Aggregates all selected models' extractions into longitudinally tracked
/// KPI series, and optionally sweeps the clustering threshold.
inline TrackResult cmd_track(const config::PipelineConfig& config,
                             const std::vector<std::string>& models = {},
                             const std::vector<double>& sweep = {},
                             std::ostream& log = std::cerr) {
  fs::path out_dir = config.output_dir;
  auto scorer = sim::make_scorer(config.scorer);
  auto provider_configs = detail::select_providers(config, models);

  TrackResult result;
  std::vector<agg::ModelGroup> items;
  std::vector<std::string> model_ids;
  for (const auto& provider_config : provider_configs) {
    model_ids.push_back(provider_config.model_id);
    fs::path path = extraction_path(out_dir, provider_config.model_id);
    if (!fs::exists(path)) {
      result.errors.push_back("no extractions for model " + provider_config.model_id);
      log << "track: missing " << path.string() << "\n";
      continue;
    }
    for (const auto& [ref, extraction] : detail::load_extraction_file(path).ok) {
      fiscal::Period call_period{ref.fiscal_year, ref.fiscal_quarter};
      for (const auto& group : matching::dedupe_supersets(extraction.groups)) {
        if (!group.value) continue;  // qualitative values are not tracked
        auto resolved =
            agg::resolve_period(group, call_period, config.calendar, ref.ticker);
        if (resolved.warned) ++result.warned_periods;
        items.push_back({extraction.model_id, group, resolved.period, ref.ticker});
      }
    }
  }
  result.items = items.size();

  std::vector<agg::KpiCluster> clusters;
  auto tracked = agg::track(items, *scorer, config.thresholds.cluster_similarity,
                            config.thresholds.value_tolerance,
                            config.thresholds.min_periods, &clusters);
  result.clusters = clusters.size();
  result.tracked_kpis = tracked.size();

  std::vector<nlohmann::json> tracked_rows;
  for (const auto& kpi : tracked) tracked_rows.push_back(jsonl::to_json(kpi));
  jsonl::write_jsonl(out_dir / "tracked.jsonl", jsonl::kTrackedSchema, 1, tracked_rows);

  {
    std::ofstream csv(out_dir / "series.csv", std::ios::binary | std::ios::trunc);
    csv << "ticker,centroid_label,fiscal_year,fiscal_quarter,value,model_ids\n";
    for (const auto& kpi : tracked) {
      for (const auto& point : kpi.series) {
        std::string models_joined;
        for (size_t i = 0; i < point.model_ids.size(); ++i) {
          if (i) models_joined += ";";
          models_joined += point.model_ids[i];
        }
        csv << csv_escape(kpi.ticker) << "," << csv_escape(kpi.centroid_label) << ","
            << point.period.fiscal_year << "," << point.period.quarter << ","
            << nlohmann::json(point.value).dump() << "," << csv_escape(models_joined)
            << "\n";
      }
    }
  }

  auto stats = agg::agreement_stats(tracked, model_ids);
  nlohmann::json agreement{{"instances", stats.instances},
                           {"tracked_kpis", stats.tracked_kpis},
                           {"all_model_agreement_pct", stats.all_model_agreement_pct}};
  agreement["per_model"] = nlohmann::json::object();
  for (const auto& [model, a] : stats.per_model) {
    agreement["per_model"][model] = {{"share_pct", a.share_pct},
                                     {"centroid_pct", a.centroid_pct},
                                     {"overlap_pct", a.overlap_pct}};
  }
  {
    std::ofstream out(out_dir / "agreement.json", std::ios::binary | std::ios::trunc);
    out << agreement.dump(2) << "\n";
  }

  if (!sweep.empty()) {
    result.sweep = agg::threshold_sweep(items, *scorer, sweep,
                                        config.thresholds.value_tolerance,
                                        config.thresholds.min_periods, model_ids);
    nlohmann::json sweep_json = nlohmann::json::array();
    log << std::left << std::setw(11) << "threshold" << std::right << std::setw(10)
        << "clusters" << std::setw(10) << "tracked" << std::setw(10) << "points"
        << std::setw(12) << "all_agree%" << "\n";
    for (const auto& row : result.sweep->rows) {
      sweep_json.push_back({{"threshold", row.threshold},
                            {"clusters", row.clusters},
                            {"tracked_kpis", row.tracked_kpis},
                            {"series_points", row.series_points},
                            {"all_model_agreement_pct",
                             row.stats.all_model_agreement_pct}});
      std::ostringstream line;
      line << std::left << std::setw(11) << row.threshold << std::right
           << std::setw(10) << row.clusters << std::setw(10) << row.tracked_kpis
           << std::setw(10) << row.series_points << std::setw(12) << std::fixed
           << std::setprecision(2) << row.stats.all_model_agreement_pct;
      log << line.str() << "\n";
    }
    log << "sweep: cluster counts "
        << (result.sweep->clusters_monotone ? "are" : "ARE NOT")
        << " non-decreasing in the threshold\n";
    std::ofstream out(out_dir / "sweep.json", std::ios::binary | std::ios::trunc);
    out << nlohmann::json{{"rows", sweep_json},
                          {"clusters_monotone", result.sweep->clusters_monotone}}
               .dump(2)
        << "\n";
  }

  log << "track: " << result.items << " groups -> " << result.clusters
      << " clusters -> " << result.tracked_kpis << " tracked series\n";
  return result;
}

/// Prints the evaluation table for every eval report found in the output
/// directory.
inline int cmd_report(const config::PipelineConfig& config,
                      std::ostream& out = std::cout) {
  fs::path out_dir = config.output_dir;
  std::vector<metrics::EvalReport> reports;
  if (fs::is_directory(out_dir)) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("eval_", 0) == 0 &&
          entry.path().extension() == ".json") {
        paths.push_back(entry.path());
      }
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
      auto j = nlohmann::json::parse(read_file(path), nullptr, false);
      if (j.is_discarded()) continue;
      reports.push_back(jsonl::eval_report_from_json(j));
    }
  }
  if (reports.empty()) {
    out << "no evaluation reports in " << out_dir.string() << "\n";
    return 1;
  }
  print_eval_table(reports, out);
  return 0;
}

}  // namespace kpix::pipe
