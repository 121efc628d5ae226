#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "kpix/matching.hpp"
#include "oracles.hpp"

using namespace kpix;
using extract::Entity;
using extract::EntityCategory;
using extract::KpiGroup;
using matching::align;
using matching::dedupe_supersets;
using matching::GoldGroup;
using matching::MatchKind;
using matching::MatchOptions;
using matching::value_match;

namespace {

KpiGroup numeric_pred(const std::string& label, double value) {
  KpiGroup g;
  g.label = label;
  g.value = value;
  return g;
}

KpiGroup range_pred(const std::string& label, double bottom, double top) {
  KpiGroup g;
  g.label = label;
  g.is_range = true;
  g.bottom_of_range = bottom;
  g.top_of_range = top;
  g.value = (bottom + top) / 2.0;
  return g;
}

KpiGroup qual_pred(const std::string& label, const std::string& text) {
  KpiGroup g;
  g.label = label;
  g.value_non_numeric = text;
  return g;
}

GoldGroup numeric_gold(const std::string& label, double value) {
  GoldGroup g;
  g.label = label;
  g.val.numeric = true;
  g.val.number = value;
  return g;
}

GoldGroup qual_gold(const std::string& label, const std::string& text) {
  GoldGroup g;
  g.label = label;
  g.val.text = text;
  return g;
}

Entity ent(const std::string& text, EntityCategory c) { return {text, c}; }

}  // namespace

TEST_CASE("value_match exact at relative tolerance") {
  sim::LexicalScorer scorer;
  auto kind = value_match(numeric_pred("revenue", 2.5e9),
                          numeric_gold("revenue", 2.5e9), scorer);
  REQUIRE(kind.has_value());
  CHECK(*kind == MatchKind::exact);

  // Within 1e-9 relative.
  auto close = value_match(numeric_pred("revenue", 2.5e9 * (1 + 1e-10)),
                           numeric_gold("revenue", 2.5e9), scorer);
  REQUIRE(close.has_value());
  CHECK(*close == MatchKind::exact);

  CHECK_FALSE(value_match(numeric_pred("revenue", 2.5e9),
                          numeric_gold("revenue", 2.6e9), scorer)
                  .has_value());
}

TEST_CASE("value_match catches thousand-scale slips when labels agree") {
  sim::LexicalScorer scorer;
  // Same label, values off by 1000x in either direction.
  auto up = value_match(numeric_pred("net revenue", 2.5e9),
                        numeric_gold("net revenue", 2.5e6), scorer);
  REQUIRE(up.has_value());
  CHECK(*up == MatchKind::scaled_1000x);

  auto down = value_match(numeric_pred("net revenue", 2.5e6),
                          numeric_gold("net revenue", 2.5e9), scorer);
  REQUIRE(down.has_value());
  CHECK(*down == MatchKind::scaled_1000x);

  // 1000^3 still matches; 1000^4 does not.
  CHECK(value_match(numeric_pred("net revenue", 2.5e9),
                    numeric_gold("net revenue", 2.5), scorer)
            .has_value());
  CHECK_FALSE(value_match(numeric_pred("net revenue", 2.5e12),
                          numeric_gold("net revenue", 2.5), scorer)
                  .has_value());
}

TEST_CASE("scale slips are rejected when labels disagree") {
  sim::LexicalScorer scorer;
  // "orders" vs "backlog" have low trigram similarity, so a 1000x slip is
  // treated as a coincidence, not a match.
  CHECK_FALSE(value_match(numeric_pred("orders", 2.5e9),
                          numeric_gold("backlog", 2.5e6), scorer)
                  .has_value());
}

TEST_CASE("range predictions absorb contained gold values inclusively") {
  sim::LexicalScorer scorer;
  auto pred = range_pred("net income guidance", 1.2e9, 1.4e9);
  CHECK(value_match(pred, numeric_gold("net income guidance", 1.3e9), scorer)
            .has_value());
  // Bounds are inclusive.
  auto lo = value_match(pred, numeric_gold("net income guidance", 1.2e9), scorer);
  REQUIRE(lo.has_value());
  CHECK(*lo == MatchKind::range_contained);
  auto hi = value_match(pred, numeric_gold("net income guidance", 1.4e9), scorer);
  REQUIRE(hi.has_value());
  CHECK(*hi == MatchKind::range_contained);
  CHECK_FALSE(value_match(pred, numeric_gold("net income guidance", 1.5e9), scorer)
                  .has_value());
}

TEST_CASE("range midpoint equal to gold scores exact before range_contained") {
  sim::LexicalScorer scorer;
  auto pred = range_pred("revenue", 1.2e9, 1.4e9);  // value = 1.3e9
  auto kind = value_match(pred, numeric_gold("revenue", 1.3e9), scorer);
  REQUIRE(kind.has_value());
  CHECK(*kind == MatchKind::exact);
}

TEST_CASE("qualitative values match on gestalt above the gate") {
  sim::LexicalScorer scorer;
  auto same = value_match(qual_pred("use", "record high"),
                          qual_gold("use", "record high"), scorer);
  REQUIRE(same.has_value());
  CHECK(*same == MatchKind::nonnumeric_gestalt);

  // gestalt("record", "record high") = 12/17 = 0.706 < 0.8: no match.
  CHECK_FALSE(value_match(qual_pred("use", "record"),
                          qual_gold("use", "record high"), scorer)
                  .has_value());

  // "record highs" vs "record high": 22/23 > 0.8.
  CHECK(value_match(qual_pred("use", "record highs"),
                    qual_gold("use", "record high"), scorer)
            .has_value());

  // Numeric pred never matches a qualitative gold.
  CHECK_FALSE(value_match(numeric_pred("use", 5.0),
                          qual_gold("use", "record high"), scorer)
                  .has_value());
}

TEST_CASE("dedupe removes strict entity subsets with equal values") {
  KpiGroup small = numeric_pred("revenue", 5e6);
  small.entities = {ent("revenue", EntityCategory::kpi_name)};
  KpiGroup big = numeric_pred("Cloud revenue", 5e6);
  big.entities = {ent("revenue", EntityCategory::kpi_name),
                  ent("Cloud", EntityCategory::scope)};
  auto out = dedupe_supersets(std::vector<KpiGroup>{small, big});
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == "Cloud revenue");
}

TEST_CASE("dedupe collapses chains to the maximal group") {
  KpiGroup a = numeric_pred("a", 1.0);
  a.entities = {ent("revenue", EntityCategory::kpi_name)};
  KpiGroup b = numeric_pred("b", 1.0);
  b.entities = {ent("revenue", EntityCategory::kpi_name),
                ent("Cloud", EntityCategory::scope)};
  KpiGroup c = numeric_pred("c", 1.0);
  c.entities = {ent("revenue", EntityCategory::kpi_name),
                ent("Cloud", EntityCategory::scope),
                ent("Q1", EntityCategory::date)};
  auto out = dedupe_supersets(std::vector<KpiGroup>{a, b, c});
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == "c");
}

TEST_CASE("dedupe keeps subsets whose values differ") {
  KpiGroup small = numeric_pred("revenue", 5e6);
  small.entities = {ent("revenue", EntityCategory::kpi_name)};
  KpiGroup big = numeric_pred("Cloud revenue", 7e6);
  big.entities = {ent("revenue", EntityCategory::kpi_name),
                  ent("Cloud", EntityCategory::scope)};
  CHECK(dedupe_supersets(std::vector<KpiGroup>{small, big}).size() == 2);
}

TEST_CASE("dedupe keeps equal entity sets (no strict superset)") {
  KpiGroup a = numeric_pred("a", 1.0);
  a.entities = {ent("revenue", EntityCategory::kpi_name)};
  KpiGroup b = numeric_pred("b", 1.0);
  b.entities = {ent("Revenue", EntityCategory::kpi_name)};  // same after folding
  CHECK(dedupe_supersets(std::vector<KpiGroup>{a, b}).size() == 2);
}

TEST_CASE("dedupe matches entity texts case- and whitespace-insensitively") {
  KpiGroup small = numeric_pred("revenue", 5e6);
  small.entities = {ent("NET  revenue", EntityCategory::kpi_name)};
  KpiGroup big = numeric_pred("net revenue Q1", 5e6);
  big.entities = {ent("net revenue", EntityCategory::kpi_name),
                  ent("Q1", EntityCategory::date)};
  auto out = dedupe_supersets(std::vector<KpiGroup>{small, big});
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == "net revenue Q1");
}

TEST_CASE("dedupe works for gold groups too") {
  GoldGroup small = numeric_gold("revenue", 5e6);
  small.entities = {ent("revenue", EntityCategory::kpi_name)};
  GoldGroup big = numeric_gold("Cloud revenue", 5e6);
  big.entities = {ent("revenue", EntityCategory::kpi_name),
                  ent("Cloud", EntityCategory::scope)};
  auto out = dedupe_supersets(std::vector<GoldGroup>{small, big});
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == "Cloud revenue");
}

TEST_CASE("align pairs by label similarity greedily") {
  sim::LexicalScorer scorer;
  std::vector<KpiGroup> preds = {numeric_pred("total revenue", 2.5e9),
                                 numeric_pred("operating income", 8e8)};
  std::vector<GoldGroup> golds = {numeric_gold("operating income", 8e8),
                                  numeric_gold("total revenues", 2.5e9)};
  auto report = align(preds, golds, scorer);
  REQUIRE(report.pairs.size() == 2);
  CHECK(report.unmatched_predictions.empty());
  CHECK(report.unmatched_golds.empty());
  // pred 0 <-> gold 1, pred 1 <-> gold 0.
  for (const auto& pair : report.pairs) {
    if (pair.pred_index == 0) CHECK(pair.gold_index == 1);
    if (pair.pred_index == 1) CHECK(pair.gold_index == 0);
  }
  // The identical-label pair is accepted first: similarity 1.0.
  CHECK(report.pairs[0].pred_index == 1);
  CHECK(report.pairs[0].label_similarity == 1.0);
}

TEST_CASE("align consumes golds but lets range predictions match repeatedly") {
  sim::LexicalScorer scorer;
  std::vector<KpiGroup> preds = {range_pred("guidance", 1.0e9, 2.0e9)};
  std::vector<GoldGroup> golds = {numeric_gold("guidance", 1.2e9),
                                  numeric_gold("guidance", 1.8e9)};
  auto report = align(preds, golds, scorer);
  REQUIRE(report.pairs.size() == 2);
  CHECK(report.pairs[0].pred_index == 0);
  CHECK(report.pairs[1].pred_index == 0);
  CHECK(report.unmatched_golds.empty());
  CHECK(report.unmatched_predictions.empty());
}

TEST_CASE("align leaves incompatible sides unmatched") {
  sim::LexicalScorer scorer;
  std::vector<KpiGroup> preds = {numeric_pred("revenue", 2.5e9),
                                 numeric_pred("eps", 1.23)};
  std::vector<GoldGroup> golds = {numeric_gold("revenue", 2.5e9),
                                  numeric_gold("free cash flow", 9e8)};
  auto report = align(preds, golds, scorer);
  REQUIRE(report.pairs.size() == 1);
  CHECK(report.pairs[0].pred_index == 0);
  CHECK(report.pairs[0].gold_index == 0);
  CHECK(report.unmatched_predictions == std::vector<size_t>{1});
  CHECK(report.unmatched_golds == std::vector<size_t>{1});
}

TEST_CASE("align prefers the higher-similarity gold for a shared value") {
  sim::LexicalScorer scorer;
  // Both golds carry the same value; the pred must take the closer label.
  std::vector<KpiGroup> preds = {numeric_pred("cloud revenue", 1e9)};
  std::vector<GoldGroup> golds = {numeric_gold("total revenue", 1e9),
                                  numeric_gold("cloud revenues", 1e9)};
  auto report = align(preds, golds, scorer);
  REQUIRE(report.pairs.size() == 1);
  CHECK(report.pairs[0].gold_index == 1);
}

TEST_CASE("align agrees with the repeated-argmax oracle on random cases") {
  sim::LexicalScorer scorer;
  MatchOptions opts;
  std::mt19937 rng(20240818);
  const char* labels[] = {"net revenue",      "total revenue", "operating income",
                          "free cash flow",   "gross margin",  "cloud revenue",
                          "orders",           "eps",           "net income guidance",
                          "services revenue", "revenue"};
  const double values[] = {1e6, 2.5e6, 1e9, 2.5e9, 1.3e9, 19.0, 61.5};

  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<size_t> n_preds(0, 5), n_golds(0, 5);
    std::uniform_int_distribution<size_t> pick_label(0, std::size(labels) - 1);
    std::uniform_int_distribution<size_t> pick_value(0, std::size(values) - 1);
    std::uniform_int_distribution<int> pick_kind(0, 9);

    std::vector<KpiGroup> preds;
    for (size_t i = n_preds(rng); i > 0; --i) {
      int kind = pick_kind(rng);
      if (kind < 6) {
        preds.push_back(numeric_pred(labels[pick_label(rng)], values[pick_value(rng)]));
      } else if (kind < 8) {
        double v = values[pick_value(rng)];
        preds.push_back(range_pred(labels[pick_label(rng)], v * 0.9, v * 1.1));
      } else {
        preds.push_back(qual_pred(labels[pick_label(rng)],
                                  kind == 8 ? "record high" : "strong growth"));
      }
    }
    std::vector<GoldGroup> golds;
    for (size_t i = n_golds(rng); i > 0; --i) {
      if (pick_kind(rng) < 8) {
        golds.push_back(numeric_gold(labels[pick_label(rng)], values[pick_value(rng)]));
      } else {
        golds.push_back(qual_gold(labels[pick_label(rng)], "record high"));
      }
    }

    auto fast = align(preds, golds, scorer, opts);
    auto slow = oracle::align(preds, golds, scorer, opts);
    INFO("trial " << trial);
    REQUIRE(fast.pairs.size() == slow.pairs.size());
    for (size_t i = 0; i < fast.pairs.size(); ++i) {
      CHECK(fast.pairs[i].pred_index == slow.pairs[i].pred_index);
      CHECK(fast.pairs[i].gold_index == slow.pairs[i].gold_index);
      CHECK(fast.pairs[i].kind == slow.pairs[i].kind);
      CHECK(fast.pairs[i].label_similarity ==
            Catch::Approx(slow.pairs[i].label_similarity).epsilon(1e-12));
    }
    CHECK(fast.unmatched_predictions == slow.unmatched_predictions);
    CHECK(fast.unmatched_golds == slow.unmatched_golds);
  }
}

TEST_CASE("align is deterministic") {
  sim::LexicalScorer scorer;
  std::vector<KpiGroup> preds = {numeric_pred("revenue", 1e9),
                                 numeric_pred("revenues", 1e9),
                                 range_pred("guidance", 0.9e9, 1.2e9)};
  std::vector<GoldGroup> golds = {numeric_gold("revenue", 1e9),
                                  numeric_gold("net revenue", 1e9)};
  auto first = align(preds, golds, scorer);
  for (int i = 0; i < 5; ++i) {
    auto again = align(preds, golds, scorer);
    REQUIRE(again.pairs.size() == first.pairs.size());
    for (size_t k = 0; k < first.pairs.size(); ++k) {
      CHECK(again.pairs[k].pred_index == first.pairs[k].pred_index);
      CHECK(again.pairs[k].gold_index == first.pairs[k].gold_index);
    }
  }
}

TEST_CASE("empty sides align to empty reports") {
  sim::LexicalScorer scorer;
  auto report = align({}, {}, scorer);
  CHECK(report.pairs.empty());
  CHECK(report.unmatched_predictions.empty());
  CHECK(report.unmatched_golds.empty());

  std::vector<GoldGroup> golds = {numeric_gold("revenue", 1e9)};
  auto only_gold = align({}, golds, scorer);
  CHECK(only_gold.pairs.empty());
  CHECK(only_gold.unmatched_golds == std::vector<size_t>{0});
}
