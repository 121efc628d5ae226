// Independent reference implementations used to cross-check the library.
// Each oracle is written from the definition with a deliberately different
// algorithm or data layout than the production code.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kpix/matching.hpp"
#include "kpix/similarity.hpp"
#include "kpix/text.hpp"

namespace oracle {

// --- Ratcliff/Obershelp via explicit recursion on the longest common
// substring (the production code uses an iterative stack + position map).
inline void lcs_block(const std::string& a, size_t alo, size_t ahi,
                      const std::string& b, size_t blo, size_t bhi, size_t& best_i,
                      size_t& best_j, size_t& best_len) {
  best_i = alo;
  best_j = blo;
  best_len = 0;
  for (size_t i = alo; i < ahi; ++i) {
    for (size_t j = blo; j < bhi; ++j) {
      size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best_len) {
        best_i = i;
        best_j = j;
        best_len = k;
      }
    }
  }
}

inline size_t match_total(const std::string& a, size_t alo, size_t ahi,
                          const std::string& b, size_t blo, size_t bhi) {
  size_t i, j, len;
  lcs_block(a, alo, ahi, b, blo, bhi, i, j, len);
  if (len == 0) return 0;
  return len + match_total(a, alo, i, b, blo, j) +
         match_total(a, i + len, ahi, b, j + len, bhi);
}

inline double gestalt(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t m = match_total(a, 0, a.size(), b, 0, b.size());
  return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

// --- Character-trigram cosine from the written definition.
inline std::map<std::string, int> trigrams(const std::string& s) {
  std::string t = " " + kpix::collapse_ws(kpix::to_lower(s)) + " ";
  std::map<std::string, int> counts;
  if (t.size() < 3) return counts;
  for (size_t i = 0; i + 3 <= t.size(); ++i) ++counts[t.substr(i, 3)];
  return counts;
}

inline double trigram_cosine(const std::string& a, const std::string& b) {
  if (kpix::collapse_ws(a).empty() && kpix::collapse_ws(b).empty()) return 1.0;
  auto ca = trigrams(a), cb = trigrams(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : ca) {
    na += double(v) * v;
    auto it = cb.find(k);
    if (it != cb.end()) dot += double(v) * it->second;
  }
  for (const auto& [k, v] : cb) nb += double(v) * v;
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// --- Alignment by repeated argmax over the live candidate set (the
// production code sorts once and walks the list).
inline kpix::matching::MatchReport align(
    const std::vector<kpix::extract::KpiGroup>& preds,
    const std::vector<kpix::matching::GoldGroup>& golds,
    const kpix::sim::Scorer& scorer, const kpix::matching::MatchOptions& opts) {
  kpix::matching::MatchReport report;
  std::vector<bool> pred_used(preds.size(), false), gold_used(golds.size(), false);
  while (true) {
    double best_sim = -1.0;
    size_t best_p = 0, best_g = 0;
    std::optional<kpix::matching::MatchKind> best_kind;
    for (size_t p = 0; p < preds.size(); ++p) {
      if (pred_used[p]) continue;
      for (size_t g = 0; g < golds.size(); ++g) {
        if (gold_used[g]) continue;
        double sim = scorer.score(preds[p].label, golds[g].label);
        auto kind = kpix::matching::detail::classify(preds[p], golds[g], sim, opts);
        if (!kind) continue;
        if (sim > best_sim) {
          best_sim = sim;
          best_p = p;
          best_g = g;
          best_kind = kind;
        }
      }
    }
    if (!best_kind) break;
    report.pairs.push_back({best_p, best_g, *best_kind, best_sim});
    gold_used[best_g] = true;
    if (!preds[best_p].is_range) pred_used[best_p] = true;
  }
  for (size_t p = 0; p < preds.size(); ++p) {
    bool paired = false;
    for (const auto& pair : report.pairs) paired |= pair.pred_index == p;
    if (!paired) report.unmatched_predictions.push_back(p);
  }
  for (size_t g = 0; g < golds.size(); ++g) {
    if (!gold_used[g]) report.unmatched_golds.push_back(g);
  }
  return report;
}

// --- Value buckets by O(n^3) transitive closure instead of union-find.
inline std::vector<std::vector<size_t>> buckets(const std::vector<double>& values,
                                                double tol) {
  std::vector<std::vector<size_t>> groups;
  for (size_t i = 0; i < values.size(); ++i) groups.push_back({i});
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t a = 0; a < groups.size() && !merged; ++a) {
      for (size_t b = a + 1; b < groups.size() && !merged; ++b) {
        for (size_t i : groups[a]) {
          for (size_t j : groups[b]) {
            double va = values[i], vb = values[j];
            if (std::abs(va - vb) <= tol * std::max(std::abs(va), std::abs(vb))) {
              groups[a].insert(groups[a].end(), groups[b].begin(), groups[b].end());
              std::sort(groups[a].begin(), groups[a].end());
              groups.erase(groups.begin() + static_cast<long>(b));
              merged = true;
              break;
            }
          }
          if (merged) break;
        }
      }
    }
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return groups;
}

// --- Krippendorff's alpha from pairable values, straight from the formula.
// data[rater][item]; nominal metric.
inline std::optional<double> alpha(
    const std::vector<std::vector<std::optional<int>>>& data) {
  if (data.empty()) return std::nullopt;
  size_t items = data[0].size();
  double n_pairable = 0;
  std::map<int, double> totals;
  double Do_num = 0;
  for (size_t u = 0; u < items; ++u) {
    std::vector<int> vals;
    for (const auto& rater : data) {
      if (rater[u]) vals.push_back(*rater[u]);
    }
    if (vals.size() < 2) continue;
    double m = static_cast<double>(vals.size());
    n_pairable += m;
    for (int v : vals) totals[v] += 1;
    double disagreements = 0;
    for (size_t i = 0; i < vals.size(); ++i) {
      for (size_t j = 0; j < vals.size(); ++j) {
        if (i != j && vals[i] != vals[j]) disagreements += 1;
      }
    }
    Do_num += disagreements / (m - 1);
  }
  if (n_pairable <= 0) return std::nullopt;
  double Do = Do_num / n_pairable;
  double De_num = 0;
  for (const auto& [c, nc] : totals) {
    for (const auto& [k, nk] : totals) {
      if (c != k) De_num += nc * nk;
    }
  }
  double De = De_num / (n_pairable * (n_pairable - 1));
  if (Do == 0) return 1.0;
  if (De == 0) return std::nullopt;
  return 1.0 - Do / De;
}

// --- Cohen's kappa from the contingency table.
inline std::optional<double> kappa(const std::vector<int>& a,
                                   const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) return std::nullopt;
  double n = static_cast<double>(a.size());
  double agree = 0;
  std::map<int, double> ma, mb;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) agree += 1;
    ma[a[i]] += 1;
    mb[b[i]] += 1;
  }
  double po = agree / n;
  double pe = 0;
  for (const auto& [c, ca] : ma) {
    auto it = mb.find(c);
    if (it != mb.end()) pe += (ca / n) * (it->second / n);
  }
  if (pe >= 1.0) return std::nullopt;
  return (po - pe) / (1.0 - pe);
}

}  // namespace oracle
