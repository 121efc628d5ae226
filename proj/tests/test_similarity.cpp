#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "kpix/similarity.hpp"
#include "oracles.hpp"

using namespace kpix;

namespace {

std::string random_token(std::mt19937& rng) {
  static const char* words[] = {"net",     "revenue", "revenues", "income",
                                "growth",  "margin",  "eps",      "cash",
                                "flow",    "record",  "high",     "quarter",
                                "fiscal",  "year",    "orders",   "cloud"};
  std::uniform_int_distribution<size_t> pick(0, std::size(words) - 1);
  return words[pick(rng)];
}

std::string random_phrase(std::mt19937& rng, int max_words = 4) {
  std::uniform_int_distribution<int> n_words(1, max_words);
  int n = n_words(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += " ";
    out += random_token(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("gestalt ratio frozen reference points") {
  // 2*12 / (6 + 11): the common blocks of "record" and "record high".
  CHECK(sim::gestalt_ratio("record", "record high") ==
        Catch::Approx(12.0 / 17.0).epsilon(1e-12));
  CHECK(sim::gestalt_ratio("abc", "abc") == 1.0);
  CHECK(sim::gestalt_ratio("", "") == 1.0);
  CHECK(sim::gestalt_ratio("abc", "") == 0.0);
  CHECK(sim::gestalt_ratio("", "abc") == 0.0);
  CHECK(sim::gestalt_ratio("abc", "xyz") == 0.0);
  // Classic difflib value.
  CHECK(sim::gestalt_ratio("abcd", "bcde") == Catch::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("gestalt ratio agrees with the recursive oracle") {
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 400; ++trial) {
    std::string a = random_phrase(rng);
    std::string b = random_phrase(rng);
    INFO("a=\"" << a << "\" b=\"" << b << "\"");
    CHECK(sim::gestalt_ratio(a, b) ==
          Catch::Approx(oracle::gestalt(a, b)).epsilon(1e-12));
  }
  // Also raw character strings, not just word phrases.
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> ch('a', 'e');  // small alphabet forces blocks
  for (int trial = 0; trial < 400; ++trial) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>(ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>(ch(rng)));
    INFO("a=\"" << a << "\" b=\"" << b << "\"");
    CHECK(sim::gestalt_ratio(a, b) ==
          Catch::Approx(oracle::gestalt(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("gestalt ratio bounds and identity") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a = random_phrase(rng);
    std::string b = random_phrase(rng);
    double r = sim::gestalt_ratio(a, b);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(sim::gestalt_ratio(a, a) == 1.0);
  }
}

TEST_CASE("lexical similarity frozen reference points") {
  // Shared-prefix phrases differing by a plural 's'.
  CHECK(sim::lexical_similarity("net revenue", "net revenues") ==
        Catch::Approx(0.8703882797784892).epsilon(1e-12));
  CHECK(sim::lexical_similarity("", "") == 1.0);
  CHECK(sim::lexical_similarity("abc", "") == 0.0);
  CHECK(sim::lexical_similarity("", "abc") == 0.0);
  CHECK(sim::lexical_similarity("revenue", "revenue") == 1.0);
}

TEST_CASE("lexical similarity agrees with the direct-formula oracle") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a = random_phrase(rng);
    std::string b = random_phrase(rng);
    INFO("a=\"" << a << "\" b=\"" << b << "\"");
    CHECK(sim::lexical_similarity(a, b) ==
          Catch::Approx(oracle::trigram_cosine(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("lexical similarity normalizes case and whitespace") {
  CHECK(sim::lexical_similarity("Net  Revenue", "net revenue") == 1.0);
  CHECK(sim::lexical_similarity("  net revenue  ", "net revenue") == 1.0);
  CHECK(sim::lexical_similarity("NET\tREVENUE", "net revenue") == 1.0);
}

TEST_CASE("lexical similarity is symmetric") {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a = random_phrase(rng);
    std::string b = random_phrase(rng);
    CHECK(sim::lexical_similarity(a, b) ==
          Catch::Approx(sim::lexical_similarity(b, a)).epsilon(1e-14));
  }
}

TEST_CASE("scorer batch equals elementwise map") {
  auto scorer = sim::make_scorer({});
  REQUIRE(scorer->kind() == sim::ScorerKind::lexical_fallback);
  std::mt19937 rng(5);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 64; ++i) {
    pairs.emplace_back(random_phrase(rng), random_phrase(rng));
  }
  auto batch = scorer->batch_score(pairs);
  REQUIRE(batch.size() == pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(batch[i] == scorer->score(pairs[i].first, pairs[i].second));
  }
}

TEST_CASE("remote scorer config requires an endpoint") {
  sim::ScorerConfig config;
  config.kind = sim::ScorerKind::cross_encoder_remote;
  config.endpoint = "";
  CHECK_THROWS_AS(sim::make_scorer(config), kpix::ConfigError);
}
