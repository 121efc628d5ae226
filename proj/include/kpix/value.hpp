#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "kpix/text.hpp"

namespace kpix::value {

/// A source-value string reduced to comparable form: either a plain number,
/// a numeric range, or a cleaned non-numeric string.
struct CanonicalValue {
  bool numeric = false;
  double number = 0.0;  // range midpoint when is_range
  bool is_range = false;
  double bottom = 0.0;
  double top = 0.0;
  std::string text;  // cleaned original when !numeric

  bool is_numeric() const { return numeric; }
};

inline bool approx_equal(double a, double b, double rel_tol = 1e-9) {
  return std::fabs(a - b) <= rel_tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

namespace detail {

struct NumberToken {
  size_t start = 0;
  size_t end = 0;
  double digits = 0.0;
  double scale = 1.0;
  bool has_scale = false;
  // 0 none, 1 percent/percentage-points (keep figure), 2 basis points (/100)
  int percent_kind = 0;
};

inline const std::regex& number_pattern() {
  static const std::regex kPattern(
      R"((?:\$|€|£|USD\s)?\s*(\d[\d,]*(?:\.\d+)?|\.\d+)\s*(thousand|trillion|billion|million|mm|mn|bn|tn|k|m|b|t)?\b\s*(%|percentage\s+points?|percent|basis\s+points?|bps\b)?)",
      std::regex::icase);
  return kPattern;
}

inline double scale_factor(std::string word) {
  word = to_lower(word);
  if (word == "thousand" || word == "k") return 1e3;
  if (word == "million" || word == "m" || word == "mm" || word == "mn") return 1e6;
  if (word == "billion" || word == "b" || word == "bn") return 1e9;
  if (word == "trillion" || word == "t" || word == "tn") return 1e12;
  return 1.0;
}

inline std::vector<NumberToken> scan_numbers(const std::string& s) {
  std::vector<NumberToken> tokens;
  auto begin = std::sregex_iterator(s.begin(), s.end(), number_pattern());
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    size_t digit_pos = static_cast<size_t>(m.position(1));
    if (digit_pos > 0 &&
        std::isalnum(static_cast<unsigned char>(s[digit_pos - 1]))) {
      continue;  // digits embedded in a word ("Q1")
    }
    NumberToken tok;
    tok.start = static_cast<size_t>(m.position());
    tok.end = tok.start + static_cast<size_t>(m.length());
    std::string digits = m.str(1);
    digits.erase(std::remove(digits.begin(), digits.end(), ','), digits.end());
    while (!digits.empty() && digits.back() == '.') digits.pop_back();
    tok.digits = std::stod(digits);
    if (m[2].matched && m.length(2) > 0) {
      tok.scale = scale_factor(m.str(2));
      tok.has_scale = true;
    }
    if (m[3].matched && m.length(3) > 0) {
      std::string marker = to_lower(m.str(3));
      tok.percent_kind = starts_with(marker, "b") ? 2 : 1;
    }
    tokens.push_back(tok);
  }
  return tokens;
}

inline bool is_range_separator(std::string_view between) {
  std::string sep = to_lower(collapse_ws(between));
  return sep == "-" || sep == "–" || sep == "—" || sep == "to" ||
         sep == "-to-" || sep == "and" || sep == "~" || sep == "up to" ||
         sep == "or";
}

inline double token_value(const NumberToken& tok, double inherited_scale,
                          int inherited_percent) {
  double v = tok.digits;
  v *= tok.has_scale ? tok.scale : inherited_scale;
  int percent = tok.percent_kind != 0 ? tok.percent_kind : inherited_percent;
  if (percent == 2) v /= 100.0;  // one basis point is 0.01
  return v;
}

inline bool negated(const std::string& s, size_t token_start) {
  size_t i = token_start;
  while (i > 0 && is_space(s[i - 1])) --i;
  return i > 0 && s[i - 1] == '-' && (i < 2 || !is_digit(s[i - 2]));
}

}  // namespace detail

/// Reduces a raw source-value string to a canonical number, range, or
/// cleaned string. Currency signs and thousands separators are stripped,
/// scale words expand ("$43.3 billion" -> 4.33e10), percentages keep their
/// figure ("19%" -> 19), basis points divide by 100 ("100 basis points" ->
/// 1.0), and ranges inherit a trailing scale or unit across both ends
/// ("$1.2 to $1.4 billion" -> 1.2e9..1.4e9). Strings with no usable number
/// come back whitespace-normalized as non-numeric values. Total: any input
/// yields a value.
inline CanonicalValue canonical_value(std::string_view raw) {
  CanonicalValue out;
  std::string s(raw);
  auto tokens = detail::scan_numbers(s);
  if (tokens.empty()) {
    out.text = collapse_ws(raw);
    return out;
  }
  out.numeric = true;
  const auto& first = tokens[0];
  if (tokens.size() >= 2) {
    const auto& second = tokens[1];
    std::string_view between =
        std::string_view(s).substr(first.end, second.start - first.end);
    if (detail::is_range_separator(between)) {
      double inherited_scale = !first.has_scale && second.has_scale ? second.scale : 1.0;
      int inherited_percent =
          first.percent_kind == 0 ? second.percent_kind : first.percent_kind;
      double v1 = detail::token_value(first, inherited_scale, inherited_percent);
      double v2 = detail::token_value(second, 1.0, first.percent_kind != 0
                                                       ? first.percent_kind
                                                       : second.percent_kind);
      if (detail::negated(s, first.start)) v1 = -v1;
      out.is_range = true;
      out.bottom = std::min(v1, v2);
      out.top = std::max(v1, v2);
      out.number = (v1 + v2) / 2.0;
      return out;
    }
  }
  double v = detail::token_value(first, 1.0, first.percent_kind);
  if (detail::negated(s, first.start)) v = -v;
  out.number = v;
  return out;
}

}  // namespace kpix::value
