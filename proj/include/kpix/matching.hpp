#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpix/extraction.hpp"
#include "kpix/similarity.hpp"
#include "kpix/value.hpp"

namespace kpix::matching {

/// A ground-truth relation group. The annotated value is either numeric or
/// a qualitative string; both arrive canonicalized.
struct GoldGroup {
  extract::ChunkRef chunk_ref;
  std::vector<extract::Entity> entities;
  std::string label;
  value::CanonicalValue val;
};

enum class MatchKind { exact, scaled_1000x, range_contained, nonnumeric_gestalt };

inline const char* to_string(MatchKind k) {
  switch (k) {
    case MatchKind::exact: return "exact";
    case MatchKind::scaled_1000x: return "scaled_1000x";
    case MatchKind::range_contained: return "range_contained";
    case MatchKind::nonnumeric_gestalt: return "nonnumeric_gestalt";
  }
  return "exact";
}

struct MatchOptions {
  double exact_rel_tol = 1e-9;
  double scaled_similarity_gate = 0.75;  // strict >
  double gestalt_gate = 0.8;             // strict >
  int max_scale_steps = 3;               // 1000^k for k in 1..max
};

struct MatchPair {
  size_t pred_index = 0;
  size_t gold_index = 0;
  MatchKind kind = MatchKind::exact;
  double label_similarity = 0.0;
};

struct MatchReport {
  std::vector<MatchPair> pairs;  // in greedy acceptance order
  std::vector<size_t> unmatched_predictions;
  std::vector<size_t> unmatched_golds;
};

namespace detail {

inline std::vector<std::pair<std::string, int>> entity_key_set(
    const std::vector<extract::Entity>& entities) {
  std::vector<std::pair<std::string, int>> keys;
  keys.reserve(entities.size());
  for (const auto& e : entities) {
    keys.emplace_back(to_lower(collapse_ws(e.text)), static_cast<int>(e.category));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline bool strict_superset(const std::vector<std::pair<std::string, int>>& big,
                            const std::vector<std::pair<std::string, int>>& small) {
  return big.size() > small.size() &&
         std::includes(big.begin(), big.end(), small.begin(), small.end());
}

struct ValueKey {
  bool numeric = false;
  double number = 0.0;
  std::string text;
};

inline ValueKey value_key_of(const extract::KpiGroup& g) {
  ValueKey k;
  if (g.value) {
    k.numeric = true;
    k.number = *g.value;
  } else if (g.value_non_numeric) {
    k.text = to_lower(collapse_ws(*g.value_non_numeric));
  }
  return k;
}

inline ValueKey value_key_of(const GoldGroup& g) {
  ValueKey k;
  if (g.val.is_numeric()) {
    k.numeric = true;
    k.number = g.val.number;
  } else {
    k.text = to_lower(collapse_ws(g.val.text));
  }
  return k;
}

inline bool same_value(const ValueKey& a, const ValueKey& b, double rel_tol) {
  if (a.numeric != b.numeric) return false;
  if (a.numeric) return value::approx_equal(a.number, b.number, rel_tol);
  return a.text == b.text;
}

template <typename Group>
std::vector<Group> dedupe_supersets_impl(const std::vector<Group>& groups,
                                         double rel_tol) {
  std::vector<std::vector<std::pair<std::string, int>>> keys;
  std::vector<ValueKey> values;
  keys.reserve(groups.size());
  values.reserve(groups.size());
  for (const auto& g : groups) {
    keys.push_back(entity_key_set(g.entities));
    values.push_back(value_key_of(g));
  }
  std::vector<bool> keep(groups.size(), true);
  for (size_t i = 0; i < groups.size(); ++i) {
    for (size_t j = 0; j < groups.size(); ++j) {
      if (i == j || !keep[i] || !keep[j]) continue;
      if (!same_value(values[i], values[j], rel_tol)) continue;
      if (strict_superset(keys[j], keys[i])) keep[i] = false;
    }
  }
  std::vector<Group> out;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (keep[i]) out.push_back(groups[i]);
  }
  return out;
}

}  // namespace detail

/// Removes groups whose entity set is a strict subset of another group with
/// the same value (a chain a < b < c leaves only c). Relative order of the
/// survivors is preserved.
inline std::vector<extract::KpiGroup> dedupe_supersets(
    const std::vector<extract::KpiGroup>& groups, double rel_tol = 1e-9) {
  return detail::dedupe_supersets_impl(groups, rel_tol);
}

inline std::vector<GoldGroup> dedupe_supersets(const std::vector<GoldGroup>& groups,
                                               double rel_tol = 1e-9) {
  return detail::dedupe_supersets_impl(groups, rel_tol);
}

namespace detail {

/// Classification with the label similarity already in hand (align
/// precomputes the full matrix in one scorer batch).
inline std::optional<MatchKind> classify(const extract::KpiGroup& pred,
                                         const GoldGroup& gold,
                                         double label_similarity,
                                         const MatchOptions& opts) {
  const bool pred_numeric = pred.value.has_value();
  const bool gold_numeric = gold.val.is_numeric();
  if (pred_numeric && gold_numeric) {
    double pv = *pred.value;
    double gv = gold.val.number;
    if (value::approx_equal(pv, gv, opts.exact_rel_tol)) return MatchKind::exact;
    double factor = 1.0;
    for (int k = 1; k <= opts.max_scale_steps; ++k) {
      factor *= 1000.0;
      if (value::approx_equal(pv, gv * factor, opts.exact_rel_tol) ||
          value::approx_equal(pv * factor, gv, opts.exact_rel_tol)) {
        if (label_similarity > opts.scaled_similarity_gate) {
          return MatchKind::scaled_1000x;
        }
        break;
      }
    }
  }
  if (pred.is_range && gold_numeric && pred.bottom_of_range && pred.top_of_range &&
      *pred.bottom_of_range <= gold.val.number &&
      gold.val.number <= *pred.top_of_range) {
    return MatchKind::range_contained;
  }
  if (pred.value_non_numeric && !gold_numeric) {
    if (sim::gestalt_ratio(*pred.value_non_numeric, gold.val.text) > opts.gestalt_gate) {
      return MatchKind::nonnumeric_gestalt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Tests whether a prediction's value is compatible with a gold value,
/// returning the strongest applicable kind: exact equality (1e-9 relative),
/// then a 1000^k scale slip guarded by label similarity above 0.75, then
/// gold containment in a predicted range, then gestalt similarity above 0.8
/// for two qualitative values.
inline std::optional<MatchKind> value_match(const extract::KpiGroup& pred,
                                            const GoldGroup& gold,
                                            const sim::Scorer& scorer,
                                            const MatchOptions& opts = {}) {
  double similarity = std::clamp(scorer.score(pred.label, gold.label), 0.0, 1.0);
  return detail::classify(pred, gold, similarity, opts);
}

/// Greedy one-pass alignment: all value-compatible (pred, gold) pairs are
/// ranked by label similarity (ties: lower pred index, then lower gold
/// index) and accepted in order when both sides are still free. An accepted
/// pair consumes its gold; it consumes its prediction too unless the
/// prediction is a range, which may absorb several golds it contains.
inline MatchReport align(const std::vector<extract::KpiGroup>& preds,
                         const std::vector<GoldGroup>& golds,
                         const sim::Scorer& scorer, const MatchOptions& opts = {}) {
  std::vector<std::pair<std::string, std::string>> label_pairs;
  label_pairs.reserve(preds.size() * golds.size());
  for (const auto& p : preds) {
    for (const auto& g : golds) {
      label_pairs.emplace_back(p.label, g.label);
    }
  }
  std::vector<double> sims =
      label_pairs.empty() ? std::vector<double>{} : scorer.batch_score(label_pairs);

  struct Candidate {
    double sim;
    size_t pred;
    size_t gold;
    MatchKind kind;
  };
  std::vector<Candidate> candidates;
  for (size_t p = 0; p < preds.size(); ++p) {
    for (size_t g = 0; g < golds.size(); ++g) {
      double s = std::clamp(sims[p * golds.size() + g], 0.0, 1.0);
      if (auto kind = detail::classify(preds[p], golds[g], s, opts)) {
        candidates.push_back({s, p, g, *kind});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.sim != b.sim) return a.sim > b.sim;
              if (a.pred != b.pred) return a.pred < b.pred;
              return a.gold < b.gold;
            });

  MatchReport report;
  std::vector<bool> pred_used(preds.size(), false);
  std::vector<bool> gold_used(golds.size(), false);
  for (const auto& c : candidates) {
    if (gold_used[c.gold] || pred_used[c.pred]) continue;
    report.pairs.push_back({c.pred, c.gold, c.kind, c.sim});
    gold_used[c.gold] = true;
    if (!preds[c.pred].is_range) pred_used[c.pred] = true;
  }
  std::vector<bool> pred_matched(preds.size(), false);
  for (const auto& pair : report.pairs) pred_matched[pair.pred_index] = true;
  for (size_t p = 0; p < preds.size(); ++p) {
    if (!pred_matched[p]) report.unmatched_predictions.push_back(p);
  }
  for (size_t g = 0; g < golds.size(); ++g) {
    if (!gold_used[g]) report.unmatched_golds.push_back(g);
  }
  return report;
}

}  // namespace kpix::matching
