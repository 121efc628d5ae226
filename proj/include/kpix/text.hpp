#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kpix {

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_upper(char c) {
  return std::isupper(static_cast<unsigned char>(c)) != 0;
}

inline bool is_lower(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0;
}

inline bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

inline char to_lower_char(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower_char);
  return out;
}

/// Trims both ends and collapses interior whitespace runs to single spaces.
inline std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (to_lower_char(a[i]) != to_lower_char(b[i])) return false;
  }
  return true;
}

/// Case-insensitive substring test.
inline bool icontains(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  if (needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (iequals(haystack.substr(i, needle.size()), needle)) return true;
  }
  return false;
}

inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\n') {
      std::string_view line = s.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      start = i + 1;
    }
  }
  if (!lines.empty() && lines.back().empty() && (s.empty() || s.back() == '\n')) {
    lines.pop_back();
  }
  return lines;
}

inline std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

namespace detail {

/// Tokens that end with a period without ending a sentence. Compared against
/// the maximal [A-Za-z0-9.] run preceding a candidate period.
inline const std::unordered_set<std::string>& abbreviation_stoplist() {
  static const std::unordered_set<std::string> kStop = {
      "Inc",  "Mr",  "Mrs", "Ms",  "Dr",  "Jr",   "Sr",  "St",   "vs",  "No",
      "Co",   "Corp", "Ltd", "U.S", "U.K", "e.g",  "i.e", "a.m",  "p.m", "approx",
      "Q1",   "Q2",  "Q3",  "Q4",  "Jan", "Feb",  "Mar", "Apr",  "Jun", "Jul",
      "Aug",  "Sep", "Sept", "Oct", "Nov", "Dec",  "etc", "Fig",  "fig", "est",
  };
  return kStop;
}

inline bool is_abbreviation_before(std::string_view s, size_t period_pos) {
  size_t end = period_pos;  // exclusive, points at the '.'
  size_t begin = end;
  while (begin > 0) {
    char c = s[begin - 1];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.') {
      --begin;
    } else {
      break;
    }
  }
  if (begin == end) return false;
  std::string token(s.substr(begin, end - begin));
  while (!token.empty() && token.front() == '.') token.erase(token.begin());
  if (token.empty()) return false;
  if (abbreviation_stoplist().count(token)) return true;
  // Single capital letter reads as an initial ("John D. Rockefeller").
  if (token.size() == 1 && is_upper(token[0])) return true;
  return false;
}

}  // namespace detail

/// Rule-based sentence splitter. A sentence ends at [.!?] (plus any closing
/// quote/bracket) when followed by whitespace and an uppercase letter or
/// digit, unless the period terminates a known abbreviation. The returned
/// sentences are trimmed; concatenating them with single spaces reproduces
/// the input modulo whitespace.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  size_t start = 0;
  size_t i = 0;
  auto flush = [&](size_t end_exclusive) {
    std::string sentence = collapse_ws(text.substr(start, end_exclusive - start));
    if (!sentence.empty()) sentences.push_back(std::move(sentence));
    start = end_exclusive;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      size_t end = i + 1;
      while (end < text.size() &&
             (text[end] == '"' || text[end] == '\'' || text[end] == ')' ||
              text[end] == ']')) {
        ++end;
      }
      size_t ws = end;
      while (ws < text.size() && is_space(text[ws])) ++ws;
      bool boundary = false;
      if (ws > end && ws < text.size() && (is_upper(text[ws]) || is_digit(text[ws]) ||
                                           text[ws] == '"' || text[ws] == '\'')) {
        boundary = true;
      }
      if (boundary && c == '.' && detail::is_abbreviation_before(text, i)) {
        boundary = false;
      }
      if (boundary) {
        flush(end);
        i = ws;
        continue;
      }
    }
    ++i;
  }
  flush(text.size());
  return sentences;
}

}  // namespace kpix
