#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kpix/errors.hpp"
#include "kpix/matching.hpp"
#include "kpix/prompts.hpp"
#include "kpix/provider.hpp"
#include "kpix/similarity.hpp"

namespace kpix::metrics {

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace detail {

inline F1Result combine(double precision, double recall) {
  F1Result out;
  out.precision = precision;
  out.recall = recall;
  out.f1 = precision + recall > 0.0
               ? 2.0 * precision * recall / (precision + recall)
               : 0.0;
  return out;
}

/// Precision/recall convention for empty sides: a mean over an empty list is
/// zero credit, so either side being empty collapses the whole score to 0.
inline std::optional<F1Result> empty_case(size_t n_preds, size_t n_golds) {
  if (n_preds == 0 || n_golds == 0) return F1Result{0.0, 0.0, 0.0};
  return std::nullopt;
}

inline std::string label_key(std::string_view label) {
  return to_lower(collapse_ws(label));
}

struct ValueList {
  std::vector<double> numbers;
  std::vector<std::string> texts;
};

/// Count of value-level coincidences between two lists under the same label:
/// numeric values pair greedily at relative tolerance, strings pair on
/// normalized equality.
inline size_t count_value_matches(ValueList a, ValueList b, double rel_tol) {
  size_t matches = 0;
  std::sort(a.numbers.begin(), a.numbers.end());
  std::sort(b.numbers.begin(), b.numbers.end());
  size_t i = 0, j = 0;
  while (i < a.numbers.size() && j < b.numbers.size()) {
    if (value::approx_equal(a.numbers[i], b.numbers[j], rel_tol)) {
      ++matches;
      ++i;
      ++j;
    } else if (a.numbers[i] < b.numbers[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::sort(a.texts.begin(), a.texts.end());
  std::sort(b.texts.begin(), b.texts.end());
  i = j = 0;
  while (i < a.texts.size() && j < b.texts.size()) {
    int cmp = a.texts[i].compare(b.texts[j]);
    if (cmp == 0) {
      ++matches;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return matches;
}

}  // namespace detail

/// Number of strict coincidences: predictions whose (normalized label,
/// canonical value) key appears among the golds, each gold crediting at
/// most one prediction.
inline size_t exact_match_count(const std::vector<extract::KpiGroup>& preds,
                                const std::vector<matching::GoldGroup>& golds,
                                double rel_tol = 1e-9) {
  std::map<std::string, detail::ValueList> pred_by_label, gold_by_label;
  for (const auto& p : preds) {
    auto& list = pred_by_label[detail::label_key(p.label)];
    if (p.value) {
      list.numbers.push_back(*p.value);
    } else if (p.value_non_numeric) {
      list.texts.push_back(to_lower(collapse_ws(*p.value_non_numeric)));
    }
  }
  for (const auto& g : golds) {
    auto& list = gold_by_label[detail::label_key(g.label)];
    if (g.val.is_numeric()) {
      list.numbers.push_back(g.val.number);
    } else {
      list.texts.push_back(to_lower(collapse_ws(g.val.text)));
    }
  }
  size_t matches = 0;
  for (const auto& [label, plist] : pred_by_label) {
    auto it = gold_by_label.find(label);
    if (it == gold_by_label.end()) continue;
    matches += detail::count_value_matches(plist, it->second, rel_tol);
  }
  return matches;
}

/// Strict-credit F1: a prediction counts if some gold under the same
/// whitespace/case-normalized label carries the same canonical value
/// (numeric at 1e-9 relative tolerance, strings on normalized equality).
inline F1Result exact_f1(const std::vector<extract::KpiGroup>& preds,
                         const std::vector<matching::GoldGroup>& golds,
                         double rel_tol = 1e-9) {
  if (auto trivial = detail::empty_case(preds.size(), golds.size())) return *trivial;
  size_t matches = exact_match_count(preds, golds, rel_tol);
  double p = static_cast<double>(matches) / static_cast<double>(preds.size());
  double r = static_cast<double>(matches) / static_cast<double>(golds.size());
  return detail::combine(p, r);
}

struct SumPair {
  double pred_sum = 0.0;  // precision-side numerator
  double gold_sum = 0.0;  // recall-side numerator
};

/// F1 from pooled numerators and pooled counts, with the empty-side
/// convention applied.
inline F1Result pooled_f1(double pred_numerator, double gold_numerator,
                          size_t n_preds, size_t n_golds) {
  if (auto trivial = detail::empty_case(n_preds, n_golds)) return *trivial;
  return detail::combine(pred_numerator / static_cast<double>(n_preds),
                         gold_numerator / static_cast<double>(n_golds));
}

/// Per-side best-similarity sums for one chunk's lists: pred_sum adds each
/// prediction's best label similarity to any gold of the same chunk,
/// gold_sum the mirror image. Pooling across chunks divides the summed
/// numerators by the pooled counts.
inline SumPair semantic_sums(const std::vector<extract::KpiGroup>& preds,
                             const std::vector<matching::GoldGroup>& golds,
                             const sim::Scorer& scorer) {
  SumPair out;
  if (preds.empty() || golds.empty()) return out;
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(preds.size() * golds.size());
  for (const auto& p : preds) {
    for (const auto& g : golds) pairs.emplace_back(p.label, g.label);
  }
  auto sims = scorer.batch_score(pairs);
  for (size_t i = 0; i < preds.size(); ++i) {
    double best = 0.0;
    for (size_t j = 0; j < golds.size(); ++j) {
      best = std::max(best, std::clamp(sims[i * golds.size() + j], 0.0, 1.0));
    }
    out.pred_sum += best;
  }
  for (size_t j = 0; j < golds.size(); ++j) {
    double best = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
      best = std::max(best, std::clamp(sims[i * golds.size() + j], 0.0, 1.0));
    }
    out.gold_sum += best;
  }
  return out;
}

/// Soft-credit F1: precision is the mean over predictions of the best label
/// similarity to any gold, recall the mirror image over golds.
inline F1Result semantic_f1(const std::vector<extract::KpiGroup>& preds,
                            const std::vector<matching::GoldGroup>& golds,
                            const sim::Scorer& scorer) {
  if (auto trivial = detail::empty_case(preds.size(), golds.size())) return *trivial;
  SumPair sums = semantic_sums(preds, golds, scorer);
  return detail::combine(sums.pred_sum / static_cast<double>(preds.size()),
                         sums.gold_sum / static_cast<double>(golds.size()));
}

/// Alignment-weighted numerators for one chunk: gold_sum adds every accepted
/// pair's label similarity, pred_sum each matched prediction's best pair (so
/// a range prediction absorbing several golds cannot push precision past 1).
inline SumPair match_sums(const matching::MatchReport& report) {
  SumPair out;
  std::map<size_t, double> best_per_pred;
  for (const auto& pair : report.pairs) {
    out.gold_sum += pair.label_similarity;
    auto [it, inserted] = best_per_pred.emplace(pair.pred_index, pair.label_similarity);
    if (!inserted) it->second = std::max(it->second, pair.label_similarity);
  }
  for (const auto& [pred, best] : best_per_pred) out.pred_sum += best;
  return out;
}

/// Alignment-weighted F1 over an existing match report.
inline F1Result match_f1(const std::vector<extract::KpiGroup>& preds,
                         const std::vector<matching::GoldGroup>& golds,
                         const matching::MatchReport& report) {
  if (auto trivial = detail::empty_case(preds.size(), golds.size())) return *trivial;
  SumPair sums = match_sums(report);
  return detail::combine(sums.pred_sum / static_cast<double>(preds.size()),
                         sums.gold_sum / static_cast<double>(golds.size()));
}

inline F1Result match_f1(const std::vector<extract::KpiGroup>& preds,
                         const std::vector<matching::GoldGroup>& golds,
                         const sim::Scorer& scorer,
                         const matching::MatchOptions& opts = {}) {
  return match_f1(preds, golds, matching::align(preds, golds, scorer, opts));
}

inline std::string format_judge_value(const value::CanonicalValue& v) {
  if (!v.is_numeric()) return v.text;
  double x = v.number;
  if (std::fabs(x) < 9.2e18 && x == std::floor(x)) {
    std::ostringstream out;
    out << static_cast<long long>(x);
    return out.str();
  }
  std::ostringstream out;
  out.precision(15);
  out << x;
  return out.str();
}

/// Renders the equivalence-judge prompt. The template must contain all four
/// placeholders; substituted values are never rescanned.
inline std::string build_judge_prompt(std::string_view context_text,
                                      std::string_view value_str,
                                      std::string_view gt_label,
                                      std::string_view pred_label,
                                      std::string_view prompt_template =
                                          prompts::kJudgePromptTemplate) {
  struct Placeholder {
    std::string_view token;
    std::string_view value;
  };
  const Placeholder placeholders[] = {
      {"{context_text}", context_text},
      {"{value_str}", value_str},
      {"{gt_label}", gt_label},
      {"{pred_label}", pred_label},
  };
  for (const auto& p : placeholders) {
    if (prompt_template.find(p.token) == std::string_view::npos) {
      throw ConfigError("judge template is missing placeholder " +
                        std::string(p.token));
    }
  }
  std::string out;
  out.reserve(prompt_template.size() + context_text.size());
  size_t i = 0;
  while (i < prompt_template.size()) {
    if (prompt_template[i] == '{') {
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

/// Extracts the is_equivalent verdict from a judge response; nullopt when
/// no parseable verdict object is present.
inline std::optional<bool> parse_judge_verdict(std::string_view raw) {
  auto [start, end] = extract::detail::find_json_object(raw);
  if (start == std::string_view::npos) return std::nullopt;
  auto j = nlohmann::json::parse(raw.substr(start, end - start), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("is_equivalent");
  if (it == j.end()) return std::nullopt;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_string()) {
    std::string s = to_lower(it->get<std::string>());
    if (s == "true" || s == "yes") return true;
    if (s == "false" || s == "no") return false;
  }
  return std::nullopt;
}

struct JudgeOutcome {
  double rate = 0.0;        // judged-equivalent pairs over gold count
  int judged_pairs = 0;     // aligned pairs put in front of the judge
  int judged_equivalent = 0;
  int parse_failures = 0;   // responses with no verdict; scored not-equivalent
  int total_golds = 0;
};

struct JudgeInstance {
  std::string context_text;
  const std::vector<extract::KpiGroup>* preds = nullptr;
  const std::vector<matching::GoldGroup>* golds = nullptr;
  const matching::MatchReport* report = nullptr;
};

/// Puts every aligned pair in front of the judge and reports the fraction
/// of golds judged equivalent. The denominator is the full (deduplicated)
/// gold count, so unmatched golds count against the rate.
inline JudgeOutcome judge_rate(const std::vector<JudgeInstance>& instances,
                               const provider::Provider& judge) {
  JudgeOutcome out;
  for (const auto& inst : instances) {
    out.total_golds += static_cast<int>(inst.golds->size());
    for (const auto& pair : inst.report->pairs) {
      const auto& pred = (*inst.preds)[pair.pred_index];
      const auto& gold = (*inst.golds)[pair.gold_index];
      std::string prompt =
          build_judge_prompt(inst.context_text, format_judge_value(gold.val),
                             gold.label, pred.label);
      ++out.judged_pairs;
      auto completion = judge.complete(prompt);
      auto verdict = parse_judge_verdict(completion.text);
      if (!verdict) {
        ++out.parse_failures;
        continue;
      }
      if (*verdict) ++out.judged_equivalent;
    }
  }
  out.rate = out.total_golds > 0
                 ? static_cast<double>(out.judged_equivalent) / out.total_golds
                 : 0.0;
  return out;
}

/// Krippendorff's alpha for nominal data over a raters-by-items matrix with
/// missing ratings. Zero observed disagreement returns 1.0; zero expected
/// disagreement with observed disagreement present, or no item rated by at
/// least two raters, raises UndefinedMetricError.
inline double krippendorff_alpha(
    const std::vector<std::vector<std::optional<int>>>& ratings) {
  if (ratings.empty()) throw UndefinedMetricError("alpha needs at least one rater");
  size_t items = ratings.front().size();
  for (const auto& row : ratings) {
    if (row.size() != items) {
      throw UndefinedMetricError("raters rated differing item counts");
    }
  }
  std::map<std::pair<int, int>, double> coincidence;
  std::map<int, double> totals;
  double n = 0.0;
  for (size_t item = 0; item < items; ++item) {
    std::vector<int> unit;
    for (const auto& row : ratings) {
      if (row[item]) unit.push_back(*row[item]);
    }
    if (unit.size() < 2) continue;
    double weight = 1.0 / static_cast<double>(unit.size() - 1);
    for (size_t a = 0; a < unit.size(); ++a) {
      for (size_t b = 0; b < unit.size(); ++b) {
        if (a == b) continue;
        coincidence[{unit[a], unit[b]}] += weight;
      }
    }
  }
  for (const auto& [pair, count] : coincidence) {
    totals[pair.first] += count;
    n += count;
  }
  if (n <= 0.0) {
    throw UndefinedMetricError("alpha needs an item rated by at least two raters");
  }
  double observed = 0.0;
  for (const auto& [pair, count] : coincidence) {
    if (pair.first != pair.second) observed += count;
  }
  double do_ = observed / n;
  if (do_ == 0.0) return 1.0;
  double expected = 0.0;
  for (const auto& [c, nc] : totals) {
    for (const auto& [k, nk] : totals) {
      if (c != k) expected += nc * nk;
    }
  }
  double de = expected / (n * (n - 1.0));
  if (de == 0.0) {
    throw UndefinedMetricError("alpha is undefined: no expected disagreement");
  }
  return 1.0 - do_ / de;
}

/// Cohen's kappa between two equal-length rating lists. A shared constant
/// marginal (pe = 1) leaves kappa undefined.
inline double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw UndefinedMetricError("kappa needs equal-length rating lists");
  }
  if (a.empty()) throw UndefinedMetricError("kappa needs at least one item");
  double n = static_cast<double>(a.size());
  std::map<int, double> count_a, count_b;
  double agree = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ++count_a[a[i]];
    ++count_b[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  double po = agree / n;
  double pe = 0.0;
  for (const auto& [code, na] : count_a) {
    auto it = count_b.find(code);
    if (it != count_b.end()) pe += (na / n) * (it->second / n);
  }
  if (pe >= 1.0) {
    throw UndefinedMetricError("kappa is undefined: expected agreement is 1");
  }
  return (po - pe) / (1.0 - pe);
}

/// Mean pairwise kappa over more than two raters; rater pairs with an
/// undefined kappa (constant shared marginal, no shared items) are skipped.
inline double average_pairwise_kappa(
    const std::vector<std::vector<std::optional<int>>>& ratings) {
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < ratings.size(); ++i) {
    for (size_t j = i + 1; j < ratings.size(); ++j) {
      std::vector<int> a, b;
      size_t items = std::min(ratings[i].size(), ratings[j].size());
      for (size_t item = 0; item < items; ++item) {
        if (ratings[i][item] && ratings[j][item]) {
          a.push_back(*ratings[i][item]);
          b.push_back(*ratings[j][item]);
        }
      }
      try {
        sum += cohen_kappa(a, b);
        ++pairs;
      } catch (const UndefinedMetricError&) {
        // skip this pair
      }
    }
  }
  if (pairs == 0) {
    throw UndefinedMetricError("kappa is undefined for every rater pair");
  }
  return sum / static_cast<double>(pairs);
}

struct EvalReport {
  std::string model_id;
  F1Result exact;
  F1Result semantic;
  F1Result match;
  std::optional<JudgeOutcome> judge;
  size_t predictions = 0;  // after dedup
  size_t golds = 0;        // after dedup
  size_t matched_pairs = 0;
  size_t skipped_chunks = 0;  // refs present on only one side
};

}  // namespace kpix::metrics
