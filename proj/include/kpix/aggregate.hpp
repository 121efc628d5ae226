#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "kpix/extraction.hpp"
#include "kpix/fiscal.hpp"
#include "kpix/similarity.hpp"

namespace kpix::agg {

/// One model's extracted group, placed in time and ready for aggregation.
struct ModelGroup {
  std::string model_id;
  extract::KpiGroup group;
  fiscal::Period period;
  std::string ticker;
};

struct ResolvedPeriod {
  fiscal::Period period;
  bool warned = false;  // explicit-looking date mention failed to parse
};

namespace detail {

struct DateParse {
  fiscal::Period period;
  bool year_only = false;
};

inline bool looks_explicit(const std::string& lowered) {
  static const std::regex kMarker(
      R"((19|20)\d{2}|q[1-4]\b|(january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)\b)");
  return std::regex_search(lowered, kMarker);
}

inline std::optional<DateParse> parse_date_mention(const std::string& text,
                                                   const fiscal::FiscalCalendar& calendar,
                                                   const std::string& ticker) {
  std::string lowered = to_lower(collapse_ws(text));
  std::smatch m;

  static const std::regex kQuarterYear(R"(q([1-4])\s*(?:of\s+)?((?:19|20)\d{2}))");
  if (std::regex_search(lowered, m, kQuarterYear)) {
    return DateParse{{std::stoi(m.str(2)), std::stoi(m.str(1))}, false};
  }
  static const std::regex kYearQuarter(R"(((?:19|20)\d{2})\s*q([1-4]))");
  if (std::regex_search(lowered, m, kYearQuarter)) {
    return DateParse{{std::stoi(m.str(1)), std::stoi(m.str(2))}, false};
  }
  static const std::regex kWordQuarter(
      R"((first|second|third|fourth)\s+quarter\s+(?:of\s+)?(?:fiscal\s+(?:year\s+)?)?((?:19|20)\d{2}))");
  if (std::regex_search(lowered, m, kWordQuarter)) {
    int q = 1;
    if (m.str(1) == "second") q = 2;
    if (m.str(1) == "third") q = 3;
    if (m.str(1) == "fourth") q = 4;
    return DateParse{{std::stoi(m.str(2)), q}, false};
  }
  static const std::regex kMonthYear(
      R"((january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)\.?\s+((?:19|20)\d{2}))");
  if (std::regex_search(lowered, m, kMonthYear)) {
    auto month = fiscal::month_from_name(m.str(1));
    if (month) {
      return DateParse{calendar.period_of(ticker, std::stoi(m.str(2)), *month), false};
    }
  }
  static const std::regex kBareYear(R"((?:^|[^0-9])((?:19|20)\d{2})(?:[^0-9]|$))");
  if (std::regex_search(lowered, m, kBareYear)) {
    return DateParse{{std::stoi(m.str(1)), 0}, true};
  }
  return std::nullopt;
}

}  // namespace detail

/// Assigns a fiscal period to a group. The default is the period of the
/// call itself; a date entity naming a concrete other quarter or year
/// ("Q3 2024", "October 2023", "fiscal year 2026") overrides it. Year-only
/// mentions of another year map to that year with the quarter-0 full-year
/// sentinel; mentions of the call's own year keep the call period. A date
/// entity that looks explicit (contains a year, Qn or month name) but fails
/// to parse keeps the call period and sets the warning flag.
inline ResolvedPeriod resolve_period(const extract::KpiGroup& group,
                                     const fiscal::Period& call_period,
                                     const fiscal::FiscalCalendar& calendar,
                                     const std::string& ticker) {
  ResolvedPeriod out;
  out.period = call_period;
  bool explicit_seen = false;
  for (const auto& e : group.entities) {
    if (e.category != extract::EntityCategory::date) continue;
    std::string lowered = to_lower(collapse_ws(e.text));
    if (!detail::looks_explicit(lowered)) continue;
    explicit_seen = true;
    auto parsed = detail::parse_date_mention(e.text, calendar, ticker);
    if (!parsed) continue;
    if (parsed->year_only) {
      if (parsed->period.fiscal_year == call_period.fiscal_year) {
        out.period = call_period;
      } else {
        out.period = parsed->period;
      }
    } else {
      out.period = parsed->period;
    }
    return out;
  }
  out.warned = explicit_seen;  // looked explicit, nothing parsed
  return out;
}

/// Transitive-closure bucketing of numeric values: two items join when
/// |va - vb| <= tol * max(|va|, |vb|), and buckets are the connected
/// components of that relation. Buckets are ordered by smallest member
/// index; members are ascending.
inline std::vector<std::vector<size_t>> align_values(const std::vector<double>& values,
                                                     double tolerance) {
  std::vector<size_t> parent(values.size());
  std::iota(parent.begin(), parent.end(), size_t{0});
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (size_t i = 0; i < values.size(); ++i) {
    for (size_t j = i + 1; j < values.size(); ++j) {
      double gap = std::fabs(values[i] - values[j]);
      double scale = std::max(std::fabs(values[i]), std::fabs(values[j]));
      if (gap <= tolerance * scale) {
        size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::map<size_t, std::vector<size_t>> by_root;
  for (size_t i = 0; i < values.size(); ++i) by_root[find(i)].push_back(i);
  std::vector<std::vector<size_t>> out;
  out.reserve(by_root.size());
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  return out;
}

namespace detail {

inline std::string norm_label(std::string_view label) {
  return to_lower(collapse_ws(label));
}

/// Pairwise similarity matrix for a label list, scored in one batch.
inline std::vector<std::vector<double>> similarity_matrix(
    const std::vector<std::string>& labels, const sim::Scorer& scorer) {
  size_t n = labels.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 1.0));
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(labels[i], labels[j]);
  }
  auto sims = pairs.empty() ? std::vector<double>{} : scorer.batch_score(pairs);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double s = std::clamp(sims[k++], 0.0, 1.0);
      matrix[i][j] = s;
      matrix[j][i] = s;
    }
  }
  return matrix;
}

}  // namespace detail

/// Complete-linkage agglomerative clustering over labels: repeatedly merge
/// the pair of clusters whose weakest cross-pair similarity is maximal and
/// at least the threshold. Ties prefer the pair whose sorted minimum member
/// labels are lexicographically smallest, so the outcome is independent of
/// input order given sorted input. Every member of a resulting cluster is
/// within-threshold of every other member.
inline std::vector<std::vector<size_t>> cluster_labels(
    const std::vector<std::string>& labels, const sim::Scorer& scorer,
    double threshold) {
  size_t n = labels.size();
  auto matrix = detail::similarity_matrix(labels, scorer);
  std::vector<std::string> norm(n);
  for (size_t i = 0; i < n; ++i) norm[i] = detail::norm_label(labels[i]);

  std::vector<std::vector<size_t>> clusters;
  clusters.reserve(n);
  for (size_t i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<std::string> min_label(norm);

  auto linkage = [&](const std::vector<size_t>& a, const std::vector<size_t>& b) {
    double link = 1.0;
    for (size_t i : a) {
      for (size_t j : b) link = std::min(link, matrix[i][j]);
    }
    return link;
  };

  while (clusters.size() > 1) {
    double best_link = -1.0;
    size_t best_a = 0, best_b = 0;
    std::pair<std::string, std::string> best_key;
    for (size_t a = 0; a < clusters.size(); ++a) {
      for (size_t b = a + 1; b < clusters.size(); ++b) {
        double link = linkage(clusters[a], clusters[b]);
        if (link < threshold) continue;
        auto key = std::minmax(min_label[a], min_label[b]);
        std::pair<std::string, std::string> key_pair{key.first, key.second};
        if (link > best_link || (link == best_link && key_pair < best_key)) {
          best_link = link;
          best_a = a;
          best_b = b;
          best_key = key_pair;
        }
      }
    }
    if (best_link < 0.0) break;
    auto& target = clusters[best_a];
    target.insert(target.end(), clusters[best_b].begin(), clusters[best_b].end());
    std::sort(target.begin(), target.end());
    min_label[best_a] = std::min(min_label[best_a], min_label[best_b]);
    clusters.erase(clusters.begin() + static_cast<long>(best_b));
    min_label.erase(min_label.begin() + static_cast<long>(best_b));
  }
  std::sort(clusters.begin(), clusters.end(),
            [&](const std::vector<size_t>& a, const std::vector<size_t>& b) {
              const std::string& la = norm[a.front()];
              const std::string& lb = norm[b.front()];
              if (la != lb) return la < lb;
              return a.front() < b.front();
            });
  return clusters;
}

/// Index of the member label minimizing the aggregate distance
/// sum(1 - score) to the others; ties go to the lexicographically smaller
/// normalized label, then the lower index.
inline size_t centroid(const std::vector<std::string>& labels,
                       const sim::Scorer& scorer) {
  if (labels.empty()) throw InputError("centroid of an empty label set");
  if (labels.size() == 1) return 0;
  auto matrix = detail::similarity_matrix(labels, scorer);
  size_t best = 0;
  double best_score = -1.0;
  std::string best_label;
  for (size_t i = 0; i < labels.size(); ++i) {
    double total = 0.0;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (i != j) total += matrix[i][j];
    }
    std::string norm = detail::norm_label(labels[i]);
    if (total > best_score || (total == best_score && norm < best_label)) {
      best = i;
      best_score = total;
      best_label = norm;
    }
  }
  return best;
}

struct KpiCluster {
  std::string ticker;
  fiscal::Period period;
  std::vector<ModelGroup> members;
  std::string centroid_label;
  double value = 0.0;  // mean of member values
};

/// Clusters one call-period's groups: values are bucketed at the relative
/// tolerance first, then each bucket's labels are clustered at the
/// similarity threshold. Members are pre-sorted by (normalized label,
/// model id, value) so the outcome is input-order invariant.
inline std::vector<KpiCluster> cluster_groups(std::vector<ModelGroup> items,
                                              const sim::Scorer& scorer,
                                              double threshold, double tolerance) {
  std::sort(items.begin(), items.end(), [](const ModelGroup& a, const ModelGroup& b) {
    auto ka = std::make_tuple(detail::norm_label(a.group.label), a.model_id,
                              a.group.value.value_or(0.0));
    auto kb = std::make_tuple(detail::norm_label(b.group.label), b.model_id,
                              b.group.value.value_or(0.0));
    return ka < kb;
  });
  std::vector<double> values;
  values.reserve(items.size());
  for (const auto& item : items) values.push_back(item.group.value.value_or(0.0));

  std::vector<KpiCluster> out;
  for (const auto& bucket : align_values(values, tolerance)) {
    std::vector<std::string> labels;
    labels.reserve(bucket.size());
    for (size_t idx : bucket) labels.push_back(items[idx].group.label);
    for (const auto& cluster : cluster_labels(labels, scorer, threshold)) {
      KpiCluster c;
      std::vector<std::string> member_labels;
      double sum = 0.0;
      for (size_t pos : cluster) {
        const auto& item = items[bucket[pos]];
        c.members.push_back(item);
        member_labels.push_back(item.group.label);
        sum += item.group.value.value_or(0.0);
      }
      c.ticker = c.members.front().ticker;
      c.period = c.members.front().period;
      c.value = sum / static_cast<double>(c.members.size());
      c.centroid_label = member_labels[centroid(member_labels, scorer)];
      out.push_back(std::move(c));
    }
  }
  return out;
}

struct SeriesPoint {
  fiscal::Period period;
  double value = 0.0;
  std::vector<std::string> model_ids;  // sorted unique contributors
  std::string label;                   // per-period chosen centroid label
  // (model_id, normalized label) of every member, for agreement statistics
  std::vector<std::pair<std::string, std::string>> members;
};

struct TrackedKpi {
  std::string ticker;
  std::string centroid_label;
  std::vector<SeriesPoint> series;  // ascending by period, no duplicates
};

/// Longitudinal tracking: per-(ticker, period) clusters are merged across
/// periods by clustering their centroid labels at the same threshold, and
/// merged series covering at least min_periods distinct periods are kept.
inline std::vector<TrackedKpi> track(const std::vector<ModelGroup>& items,
                                     const sim::Scorer& scorer, double threshold,
                                     double tolerance, int min_periods,
                                     std::vector<KpiCluster>* clusters_out = nullptr) {
  std::map<std::string, std::map<fiscal::Period, std::vector<ModelGroup>>> by_call;
  for (const auto& item : items) {
    if (!item.group.value) continue;  // qualitative values cannot be tracked
    by_call[item.ticker][item.period].push_back(item);
  }
  std::vector<TrackedKpi> out;
  for (const auto& [ticker, periods] : by_call) {
    std::vector<KpiCluster> clusters;
    for (const auto& [period, groups] : periods) {
      for (auto& c : cluster_groups(groups, scorer, threshold, tolerance)) {
        clusters.push_back(std::move(c));
      }
    }
    if (clusters_out != nullptr) {
      clusters_out->insert(clusters_out->end(), clusters.begin(), clusters.end());
    }
    std::vector<std::string> centroid_labels;
    centroid_labels.reserve(clusters.size());
    for (const auto& c : clusters) centroid_labels.push_back(c.centroid_label);
    for (const auto& meta : cluster_labels(centroid_labels, scorer, threshold)) {
      std::map<fiscal::Period, std::vector<const KpiCluster*>> by_period;
      for (size_t idx : meta) by_period[clusters[idx].period].push_back(&clusters[idx]);
      if (static_cast<int>(by_period.size()) < min_periods) continue;
      TrackedKpi kpi;
      kpi.ticker = ticker;
      std::vector<std::string> all_labels;
      for (const auto& [period, merged] : by_period) {
        SeriesPoint point;
        point.period = period;
        std::set<std::string> models;
        std::vector<std::string> labels;
        double sum = 0.0;
        size_t count = 0;
        for (const KpiCluster* c : merged) {
          for (const auto& member : c->members) {
            models.insert(member.model_id);
            labels.push_back(member.group.label);
            point.members.emplace_back(member.model_id,
                                       detail::norm_label(member.group.label));
            sum += member.group.value.value_or(0.0);
            ++count;
          }
        }
        point.value = sum / static_cast<double>(count);
        point.model_ids.assign(models.begin(), models.end());
        point.label = labels[centroid(labels, scorer)];
        all_labels.insert(all_labels.end(), labels.begin(), labels.end());
        kpi.series.push_back(std::move(point));
      }
      kpi.centroid_label = all_labels[centroid(all_labels, scorer)];
      out.push_back(std::move(kpi));
    }
  }
  std::sort(out.begin(), out.end(), [](const TrackedKpi& a, const TrackedKpi& b) {
    if (a.ticker != b.ticker) return a.ticker < b.ticker;
    return detail::norm_label(a.centroid_label) < detail::norm_label(b.centroid_label);
  });
  return out;
}

struct ModelAgreement {
  double share_pct = 0.0;     // instances the model contributed to
  double centroid_pct = 0.0;  // instances whose chosen label came from the model
  double overlap_pct = 0.0;   // of the model's labels, share echoed verbatim by another model
};

struct AgreementStats {
  std::map<std::string, ModelAgreement> per_model;
  double all_model_agreement_pct = 0.0;  // instances every configured model touched
  size_t instances = 0;                  // tracked (kpi, period) points
  size_t tracked_kpis = 0;
};

/// Per-model contribution statistics over tracked series points. A point's
/// chosen label credits every model that contributed a member with that
/// exact normalized label, so ties credit all originators.
inline AgreementStats agreement_stats(const std::vector<TrackedKpi>& tracked,
                                      const std::vector<std::string>& model_ids) {
  AgreementStats stats;
  stats.tracked_kpis = tracked.size();
  std::map<std::string, size_t> share, centroid_hits, overlap_hits, label_totals;
  for (const auto& kpi : tracked) {
    for (const auto& point : kpi.series) {
      ++stats.instances;
      std::string chosen = detail::norm_label(point.label);
      bool all_present = !model_ids.empty();
      for (const auto& model : model_ids) {
        bool present = std::find(point.model_ids.begin(), point.model_ids.end(),
                                 model) != point.model_ids.end();
        if (present) ++share[model];
        all_present = all_present && present;
      }
      if (all_present) {
        stats.all_model_agreement_pct += 1.0;  // finalized below
      }
      for (const auto& [model, label] : point.members) {
        ++label_totals[model];
        if (label == chosen) ++centroid_hits[model];
        bool echoed = false;
        for (const auto& [other_model, other_label] : point.members) {
          if (other_model != model && other_label == label) {
            echoed = true;
            break;
          }
        }
        if (echoed) ++overlap_hits[model];
      }
    }
  }
  for (const auto& model : model_ids) {
    ModelAgreement a;
    if (stats.instances > 0) {
      a.share_pct = 100.0 * static_cast<double>(share[model]) /
                    static_cast<double>(stats.instances);
      // A model "originated" the centroid when any of its members carries
      // the chosen label; count instances, not members.
      size_t hits = 0;
      for (const auto& kpi : tracked) {
        for (const auto& point : kpi.series) {
          std::string chosen = detail::norm_label(point.label);
          for (const auto& [m, label] : point.members) {
            if (m == model && label == chosen) {
              ++hits;
              break;
            }
          }
        }
      }
      a.centroid_pct =
          100.0 * static_cast<double>(hits) / static_cast<double>(stats.instances);
    }
    if (label_totals[model] > 0) {
      a.overlap_pct = 100.0 * static_cast<double>(overlap_hits[model]) /
                      static_cast<double>(label_totals[model]);
    }
    stats.per_model[model] = a;
  }
  stats.all_model_agreement_pct =
      stats.instances > 0
          ? 100.0 * stats.all_model_agreement_pct / static_cast<double>(stats.instances)
          : 0.0;
  return stats;
}

struct SweepRow {
  double threshold = 0.0;
  size_t clusters = 0;
  size_t tracked_kpis = 0;
  size_t series_points = 0;
  AgreementStats stats;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending by threshold
  // Complete linkage can only stop merges earlier at a higher threshold, so
  // cluster counts must be non-decreasing across the ascending rows.
  bool clusters_monotone = true;
};

inline SweepResult threshold_sweep(const std::vector<ModelGroup>& items,
                                   const sim::Scorer& scorer,
                                   std::vector<double> thresholds, double tolerance,
                                   int min_periods,
                                   const std::vector<std::string>& model_ids) {
  std::sort(thresholds.begin(), thresholds.end());
  SweepResult result;
  for (double threshold : thresholds) {
    std::vector<KpiCluster> clusters;
    auto tracked = track(items, scorer, threshold, tolerance, min_periods, &clusters);
    SweepRow row;
    row.threshold = threshold;
    row.clusters = clusters.size();
    row.tracked_kpis = tracked.size();
    row.stats = agreement_stats(tracked, model_ids);
    row.series_points = row.stats.instances;
    if (!result.rows.empty() && row.clusters < result.rows.back().clusters) {
      result.clusters_monotone = false;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace kpix::agg
