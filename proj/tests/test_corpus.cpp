#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "kpix/corpus.hpp"

using namespace kpix;
using corpus::CallMetadata;
using corpus::segment_transcript;
using corpus::split_long_chunk;
using corpus::tag_regex_kpis;
using corpus::TranscriptChunk;

namespace {

const CallMetadata kMeta{"ACME", 2023, 2, "2023-05-04"};

std::string sample_transcript() {
  return
      "ACME Corp Q2 2023 Earnings Call\n"
      "May 4, 2023, 5:00 p.m. ET\n"
      "\n"
      "This transcript may contain forward-looking statements.\n"
      "\n"
      "Operator: Good afternoon, and welcome to the ACME earnings call.\n"
      "Please stand by.\n"
      "\n"
      "Jane Doe -- Chief Executive Officer: Thank you, operator. We are\n"
      "pleased to report record revenue of $2.5 billion, up 19% year over\n"
      "year. Our cloud segment grew 43%.\n"
      "\n"
      "John Smith (CFO): Gross margin expanded 120 basis points to 61.5%.\n"
      "Operating expenses were $800 million.\n"
      "\n"
      "Operator: Our first question comes from Pat Lee.\n"
      "\n"
      "Pat Lee -- Analyst: Congratulations on the quarter. Can you talk\n"
      "about guidance?\n"
      "\n"
      "Jane Doe -- Chief Executive Officer: For Q3 we expect revenue between\n"
      "$2.6 billion and $2.7 billion.\n";
}

}  // namespace

TEST_CASE("segment_transcript splits on speaker headers") {
  auto chunks = segment_transcript(sample_transcript(), kMeta);
  REQUIRE(chunks.size() == 4);

  CHECK(chunks[0].speaker_name == "Jane Doe");
  CHECK(chunks[0].speaker_role == "Chief Executive Officer");
  CHECK(chunks[0].text.find("record revenue of $2.5 billion") != std::string::npos);

  CHECK(chunks[1].speaker_name == "John Smith");
  CHECK(chunks[1].speaker_role == "CFO");

  CHECK(chunks[2].speaker_name == "Pat Lee");
  CHECK(chunks[2].speaker_role == "Analyst");

  CHECK(chunks[3].speaker_name == "Jane Doe");
  CHECK(chunks[3].text.find("between $2.6 billion and $2.7 billion") !=
        std::string::npos);

  for (size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].chunk_index == static_cast<int>(i));
    CHECK(chunks[i].ticker == "ACME");
    CHECK(chunks[i].fiscal_year == 2023);
    CHECK(chunks[i].fiscal_quarter == 2);
    CHECK(chunks[i].call_date == "2023-05-04");
  }
}

TEST_CASE("segment_transcript drops operator turns and the preamble") {
  auto chunks = segment_transcript(sample_transcript(), kMeta);
  for (const auto& c : chunks) {
    CHECK(c.speaker_name != "Operator");
    CHECK(c.text.find("forward-looking") == std::string::npos);
    CHECK(c.text.find("Earnings Call") == std::string::npos);
  }
}

TEST_CASE("segment_transcript joins continuation lines into the turn") {
  std::string raw =
      "Jane Doe -- CEO: Revenue was strong.\n"
      "We grew in every region.\n"
      "   Margins expanded too.\n";
  auto chunks = segment_transcript(raw, kMeta);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text ==
        "Revenue was strong. We grew in every region. Margins expanded too.");
}

TEST_CASE("segment_transcript ignores colon lines that are not speakers") {
  std::string raw =
      "Jane Doe -- CEO: Here is the outlook: we expect growth.\n"
      "note: margins were as follows: stable.\n";
  auto chunks = segment_transcript(raw, kMeta);
  // "note" is lowercase, so the second line continues Jane's turn.
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text.find("note: margins") != std::string::npos);
}

TEST_CASE("segment_transcript validates metadata") {
  CallMetadata bad = kMeta;
  bad.ticker = "";
  CHECK_THROWS_AS(segment_transcript("A: b.", bad), InputError);
  bad = kMeta;
  bad.fiscal_year = 0;
  CHECK_THROWS_AS(segment_transcript("A: b.", bad), InputError);
  bad = kMeta;
  bad.fiscal_quarter = 5;
  CHECK_THROWS_AS(segment_transcript("A: b.", bad), InputError);
  bad = kMeta;
  bad.call_date = "";
  CHECK_THROWS_AS(segment_transcript("A: b.", bad), InputError);
}

TEST_CASE("long turns are re-split at the sentence limit") {
  std::string text;
  for (int i = 0; i < 25; ++i) {
    text += "Sentence number " + std::to_string(i) + " is here. ";
  }
  TranscriptChunk chunk;
  chunk.ticker = "ACME";
  chunk.text = kpix::collapse_ws(text);

  auto pieces = split_long_chunk(chunk, 10);
  REQUIRE(pieces.size() == 3);
  auto count = [](const std::string& t) { return split_sentences(t).size(); };
  CHECK(count(pieces[0].text) == 10);
  CHECK(count(pieces[1].text) == 10);
  CHECK(count(pieces[2].text) == 5);
  // Nothing lost or reordered.
  CHECK(pieces[0].text + " " + pieces[1].text + " " + pieces[2].text == chunk.text);
}

TEST_CASE("split_long_chunk leaves short chunks alone") {
  TranscriptChunk chunk;
  chunk.text = "One sentence. Two sentences. Three sentences.";
  auto pieces = split_long_chunk(chunk, 10);
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].text == chunk.text);
}

TEST_CASE("split_long_chunk is idempotent") {
  std::string text;
  for (int i = 0; i < 11; ++i) text += "This is sentence " + std::to_string(i) + ". ";
  TranscriptChunk chunk;
  chunk.text = kpix::collapse_ws(text);
  auto pieces = split_long_chunk(chunk, 10);
  REQUIRE(pieces.size() == 2);
  for (const auto& piece : pieces) {
    auto again = split_long_chunk(piece, 10);
    REQUIRE(again.size() == 1);
    CHECK(again[0].text == piece.text);
  }
}

TEST_CASE("split_long_chunk rejects a non-positive limit") {
  CHECK_THROWS_AS(split_long_chunk({}, 0), ConfigError);
}

TEST_CASE("sentence splitting respects common abbreviations") {
  auto s = split_sentences(
      "Revenue hit $2.5 billion, i.e. a record. Dr. Smith of ACME Inc. agreed. "
      "Growth was 19% vs. 12% last year.");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == "Revenue hit $2.5 billion, i.e. a record.");
  CHECK(s[1] == "Dr. Smith of ACME Inc. agreed.");
  CHECK(s[2] == "Growth was 19% vs. 12% last year.");
}

TEST_CASE("sentence splitting keeps decimals intact") {
  auto s = split_sentences("Margin was 61.5% of sales. EPS came in at $1.23.");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "Margin was 61.5% of sales.");
  CHECK(s[1] == "EPS came in at $1.23.");
}

TEST_CASE("regex tagging finds dollar amounts with spans") {
  std::string text = "Revenue was $2.5 billion and opex was $800 million.";
  auto tags = tag_regex_kpis(text);
  REQUIRE(tags.size() == 2);
  CHECK(text.substr(tags[0].start, tags[0].end - tags[0].start) == "$2.5 billion");
  CHECK(tags[0].tag == "regex_dollar");
  CHECK(text.substr(tags[1].start, tags[1].end - tags[1].start) == "$800 million");
}

TEST_CASE("regex tagging finds percentage variants") {
  std::string text =
      "Up 19% this year, 2.5 percent organic, 120 basis points of margin, 40 bps "
      "sequential, and 3 percentage points of share.";
  auto tags = tag_regex_kpis(text);
  REQUIRE(tags.size() == 5);
  std::vector<std::string> spans;
  for (const auto& t : tags) {
    CHECK(t.tag == "regex_percentage");
    spans.push_back(text.substr(t.start, t.end - t.start));
  }
  CHECK(spans == std::vector<std::string>{"19%", "2.5 percent", "120 basis points",
                                          "40 bps", "3 percentage points"});
}

TEST_CASE("dollar tags win overlaps and output is sorted") {
  std::string text = "Spend of $1,200 thousand rose 7%.";
  auto tags = tag_regex_kpis(text);
  REQUIRE(tags.size() == 2);
  CHECK(tags[0].start < tags[1].start);
  CHECK(text.substr(tags[0].start, tags[0].end - tags[0].start) ==
        "$1,200 thousand");
  CHECK(text.substr(tags[1].start, tags[1].end - tags[1].start) == "7%");
  for (size_t i = 1; i < tags.size(); ++i) {
    CHECK(tags[i - 1].end <= tags[i].start);
  }
}

TEST_CASE("regex tagging handles compact dollar suffixes") {
  std::string text = "Guidance of $10B implies $2.5b per quarter and $900mm opex.";
  auto tags = tag_regex_kpis(text);
  REQUIRE(tags.size() == 3);
  CHECK(text.substr(tags[0].start, tags[0].end - tags[0].start) == "$10B");
  CHECK(text.substr(tags[1].start, tags[1].end - tags[1].start) == "$2.5b");
  CHECK(text.substr(tags[2].start, tags[2].end - tags[2].start) == "$900mm");
}
