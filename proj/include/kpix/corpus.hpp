#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "kpix/errors.hpp"
#include "kpix/text.hpp"

namespace kpix::corpus {

struct CallMetadata {
  std::string ticker;
  int fiscal_year = 0;
  int fiscal_quarter = 0;  // 1..4
  std::string call_date;   // ISO date of the call
};

struct TranscriptChunk {
  std::string ticker;
  int fiscal_year = 0;
  int fiscal_quarter = 0;
  std::string call_date;
  std::string speaker_name;
  std::string speaker_role;
  std::string text;
  int chunk_index = 0;
};

/// A tagged numeric span inside a chunk or snippet: [start, end) byte
/// offsets into the text plus the tag kind.
struct RegexTag {
  size_t start = 0;
  size_t end = 0;
  std::string tag;  // "regex_dollar" | "regex_percentage"
};

namespace detail {

inline const std::vector<std::string>& role_vocabulary() {
  static const std::vector<std::string> kRoles = {
      "CEO",      "CFO",     "COO",       "CTO",      "CIO",  "Chairman",
      "President", "Analyst", "Moderator", "Host",     "VP",   "EVP",
      "SVP",      "Director", "Treasurer", "Secretary",
  };
  return kRoles;
}

inline bool plausible_role_text(std::string_view role) {
  std::string collapsed = collapse_ws(role);
  if (collapsed.empty() || collapsed.size() > 64) return false;
  for (char c : collapsed) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == ' ' || c == '.' ||
          c == '\'' || c == '-' || c == '&' || c == '(' || c == ')' || c == ',' ||
          c == '"' || c == '/')) {
      return false;
    }
  }
  return true;
}

inline bool plausible_header_name(std::string_view header) {
  std::string collapsed = collapse_ws(header);
  if (collapsed.empty() || collapsed.size() > 64) return false;
  // "Name -- Role": judge the name part as a name, the role part loosely.
  for (std::string_view sep : {" -- ", " - ", " – ", " — "}) {
    auto pos = collapsed.find(sep);
    if (pos != std::string::npos) {
      return plausible_header_name(std::string_view(collapsed).substr(0, pos)) &&
             plausible_role_text(
                 std::string_view(collapsed).substr(pos + sep.size()));
    }
  }
  auto words = split_on(collapsed, ' ');
  if (words.empty() || words.size() > 5) return false;
  for (const auto& w : words) {
    if (w.empty()) return false;
    char first = w[0];
    bool word_ok = is_upper(first) || first == '(' || first == '"';
    for (char c : w) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '\'' ||
            c == '-' || c == '&' || c == '(' || c == ')' || c == ',' || c == '"')) {
        return false;
      }
    }
    if (!word_ok) return false;
  }
  return true;
}

struct Speaker {
  std::string name;
  std::string role;
};

/// Splits a turn header like "CFO Jane", "Jane Doe (CFO)" or
/// "Jane Doe -- Chief Financial Officer" into name and role.
inline Speaker parse_speaker(std::string_view header) {
  std::string h = collapse_ws(header);
  Speaker out;
  // "Name -- Role" / "Name - Role"
  for (std::string_view sep : {" -- ", " - ", " – ", " — "}) {
    auto pos = h.find(sep);
    if (pos != std::string::npos) {
      out.name = trim(h.substr(0, pos));
      out.role = trim(h.substr(pos + sep.size()));
      return out;
    }
  }
  // "Name (Role)"
  if (!h.empty() && h.back() == ')') {
    auto open = h.rfind('(');
    if (open != std::string::npos && open > 0) {
      out.name = trim(h.substr(0, open));
      out.role = trim(h.substr(open + 1, h.size() - open - 2));
      return out;
    }
  }
  // "Role Name" with a leading role keyword run.
  auto words = split_on(h, ' ');
  size_t role_words = 0;
  while (role_words < words.size()) {
    bool matched = false;
    for (const auto& role : role_vocabulary()) {
      if (iequals(words[role_words], role)) {
        matched = true;
        break;
      }
    }
    if (!matched) break;
    ++role_words;
  }
  if (role_words > 0 && role_words < words.size()) {
    std::vector<std::string> role(words.begin(), words.begin() + role_words);
    std::vector<std::string> name(words.begin() + role_words, words.end());
    out.role = join(role, " ");
    out.name = join(name, " ");
    return out;
  }
  out.name = h;
  return out;
}

}  // namespace detail

/// Greedy left-to-right split of `sentences` into runs of at most
/// `max_sentences` (25 sentences at limit 10 become runs of 10/10/5).
inline std::vector<std::vector<std::string>> partition_sentences(
    const std::vector<std::string>& sentences, int max_sentences) {
  std::vector<std::vector<std::string>> runs;
  size_t limit = static_cast<size_t>(max_sentences);
  for (size_t i = 0; i < sentences.size(); i += limit) {
    size_t end = std::min(sentences.size(), i + limit);
    runs.emplace_back(sentences.begin() + static_cast<long>(i),
                      sentences.begin() + static_cast<long>(end));
  }
  return runs;
}

/// Re-splits one chunk whose text exceeds `max_sentences` sentences into
/// successive chunks covering the same sentences in order. Metadata is
/// copied; chunk indices are left for the caller to reassign. A chunk
/// already within the limit comes back unchanged as a single element.
inline std::vector<TranscriptChunk> split_long_chunk(const TranscriptChunk& chunk,
                                                     int max_sentences) {
  if (max_sentences < 1) throw ConfigError("max_sentences must be >= 1");
  auto sentences = split_sentences(chunk.text);
  if (sentences.size() <= static_cast<size_t>(max_sentences)) return {chunk};
  std::vector<TranscriptChunk> out;
  for (const auto& run : partition_sentences(sentences, max_sentences)) {
    TranscriptChunk piece = chunk;
    piece.text = join(run, " ");
    out.push_back(std::move(piece));
  }
  return out;
}

/// Segments a raw earnings-call transcript into speaker turns. A turn starts
/// at a line of the form "Header:" (optionally followed by text on the same
/// line) where the header is a plausible speaker name, i.e. at most five
/// capitalized words. Operator turns are dropped, long turns are re-split at
/// `max_sentences`, and chunk indices run 0..n-1 over the result. Text before
/// the first header (title block, safe-harbor boilerplate) is discarded.
inline std::vector<TranscriptChunk> segment_transcript(std::string_view raw,
                                                       const CallMetadata& metadata,
                                                       int max_sentences = 10) {
  if (metadata.ticker.empty()) throw InputError("call metadata is missing a ticker");
  if (metadata.fiscal_year <= 0) {
    throw InputError("call metadata is missing a fiscal year");
  }
  if (metadata.fiscal_quarter < 1 || metadata.fiscal_quarter > 4) {
    throw InputError("call metadata has an out-of-range fiscal quarter");
  }
  if (metadata.call_date.empty()) throw InputError("call metadata is missing a call date");

  struct Turn {
    detail::Speaker speaker;
    std::string text;
  };
  std::vector<Turn> turns;
  bool in_turn = false;
  for (const auto& line : split_lines(raw)) {
    std::string stripped = trim(line);
    auto colon = stripped.find(':');
    bool is_header = false;
    if (colon != std::string::npos && colon > 0) {
      std::string_view head = std::string_view(stripped).substr(0, colon);
      if (detail::plausible_header_name(head)) {
        is_header = true;
        turns.push_back({detail::parse_speaker(head), trim(stripped.substr(colon + 1))});
        in_turn = true;
      }
    }
    if (!is_header && in_turn && !stripped.empty()) {
      Turn& current = turns.back();
      if (!current.text.empty()) current.text.push_back(' ');
      current.text += stripped;
    }
  }

  std::vector<TranscriptChunk> chunks;
  for (const auto& turn : turns) {
    if (iequals(turn.speaker.name, "Operator")) continue;
    std::string text = collapse_ws(turn.text);
    if (text.empty()) continue;
    TranscriptChunk base;
    base.ticker = metadata.ticker;
    base.fiscal_year = metadata.fiscal_year;
    base.fiscal_quarter = metadata.fiscal_quarter;
    base.call_date = metadata.call_date;
    base.speaker_name = turn.speaker.name;
    base.speaker_role = turn.speaker.role;
    base.text = std::move(text);
    for (auto& piece : split_long_chunk(base, max_sentences)) {
      piece.chunk_index = static_cast<int>(chunks.size());
      chunks.push_back(std::move(piece));
    }
  }
  return chunks;
}

namespace detail {

inline const std::regex& dollar_pattern() {
  // "$43.3 billion", "$ 1,234.5", "$10B", "$12 mn"
  static const std::regex kPattern(
      R"(\$\s?\d[\d,]*(?:\.\d+)?(?:\s?(?:thousand|million|billion|trillion|mm|mn|bn|[kmbt])\b)?)",
      std::regex::icase);
  return kPattern;
}

inline const std::regex& percentage_pattern() {
  // "19%", "2.5 percent", "30 percentage points", "100 basis points", "40 bps"
  static const std::regex kPattern(
      R"(\d[\d,]*(?:\.\d+)?\s?(?:%|percentage\s+points?\b|percent\b|basis\s+points?\b|bps\b))",
      std::regex::icase);
  return kPattern;
}

}  // namespace detail

/// Tags dollar-amount and percentage mentions with byte-accurate spans.
/// Dollar spans win overlaps; the result is sorted by start and
/// non-overlapping.
inline std::vector<RegexTag> tag_regex_kpis(std::string_view text) {
  std::vector<RegexTag> tags;
  std::string subject(text);
  auto scan = [&](const std::regex& pattern, const char* tag) {
    auto begin = std::sregex_iterator(subject.begin(), subject.end(), pattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      size_t start = static_cast<size_t>(it->position());
      size_t end = start + static_cast<size_t>(it->length());
      bool overlaps = false;
      for (const auto& existing : tags) {
        if (start < existing.end && existing.start < end) {
          overlaps = true;
          break;
        }
      }
      if (!overlaps) tags.push_back({start, end, tag});
    }
  };
  scan(detail::dollar_pattern(), "regex_dollar");
  scan(detail::percentage_pattern(), "regex_percentage");
  std::sort(tags.begin(), tags.end(),
            [](const RegexTag& a, const RegexTag& b) { return a.start < b.start; });
  return tags;
}

}  // namespace kpix::corpus
