#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kpix/corpus.hpp"
#include "kpix/errors.hpp"
#include "kpix/text.hpp"
#include "kpix/value.hpp"

namespace kpix::filing {

/// Hard upper bound on snippet length, applied in addition to the per-batch
/// three-sigma cut.
inline constexpr size_t kMaxSnippetChars = 4513;

struct FilingEntity {
  size_t start = 0;
  size_t end = 0;
  std::string tag;
  std::string period_kind;
  std::string start_date;
  std::string end_date;
  std::string unit;
  std::optional<double> numeric_value;
};

struct FilingMetadata {
  std::string form_type;
  std::string accession_number;
  std::string filing_date;
  std::string quarter_ending;
  std::string company_name;
};

struct FilingSnippet {
  std::string form_type;
  std::string accession_number;
  std::string filing_date;
  std::string quarter_ending;
  std::string company_name;
  std::string text;
  std::vector<FilingEntity> entities;
};

namespace detail {

inline bool is_void_element(const std::string& tag) {
  static const char* kVoid[] = {"area", "base",  "br",   "col",  "embed", "hr",
                                "img",  "input", "link", "meta", "param", "source",
                                "track", "wbr"};
  for (const char* v : kVoid) {
    if (tag == v) return true;
  }
  return false;
}

inline bool is_raw_text_element(const std::string& tag) {
  return tag == "script" || tag == "style" || tag == "title" || tag == "textarea" ||
         tag == "noscript";
}

inline bool is_candidate_element(const std::string& tag) {
  return tag == "p" || tag == "div" || tag == "span" || tag == "section";
}

inline void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") {
      out.push_back('&');
    } else if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (name == "nbsp") {
      out.push_back(' ');
    } else if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      bool ok = true;
      try {
        if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
          cp = std::stoul(std::string(name.substr(2)), nullptr, 16);
        } else {
          cp = std::stoul(std::string(name.substr(1)), nullptr, 10);
        }
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && cp > 0 && cp <= 0x10FFFF) {
        append_utf8(out, cp);
      } else {
        out.append(s.substr(i, semi - i + 1));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
      i = semi + 1;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

struct Candidate {
  size_t open_pos = 0;
  std::string text;
};

struct OpenElement {
  std::string tag;
  bool is_table = false;
  // Index into the collectors list, or -1 when this element is not a
  // snippet candidate.
  long collector = -1;
};

inline std::string read_tag_name(std::string_view html, size_t& i) {
  size_t start = i;
  while (i < html.size() &&
         (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == ':' ||
          html[i] == '-')) {
    ++i;
  }
  return to_lower(html.substr(start, i - start));
}

}  // namespace detail

/// Extracts snippet candidates from tolerant-parsed filing HTML: the subtree
/// text of every <p>, <div>, <span> and <section> outside of tables, with
/// entities decoded and whitespace collapsed. Tables are dropped wholesale.
/// Structurally broken markup (unterminated comments, tags, quotes, CDATA or
/// raw-text elements) raises ParseError carrying the byte offset of the
/// offending construct. Candidates come back in document order of their
/// opening tags, undeduplicated and unfiltered.
inline std::vector<std::string> extract_candidates(std::string_view html) {
  std::vector<detail::Candidate> candidates;
  std::vector<detail::OpenElement> stack;
  int table_depth = 0;

  auto broadcast = [&](std::string_view decoded) {
    if (table_depth > 0) return;
    for (auto& el : stack) {
      if (el.collector < 0) continue;
      auto& buf = candidates[static_cast<size_t>(el.collector)].text;
      buf.append(decoded);
    }
  };
  auto boundary = [&] { broadcast(" "); };

  size_t i = 0;
  const size_t n = html.size();
  while (i < n) {
    if (html[i] != '<') {
      size_t next = html.find('<', i);
      if (next == std::string_view::npos) next = n;
      broadcast(detail::decode_entities(html.substr(i, next - i)));
      i = next;
      continue;
    }
    size_t tag_pos = i;
    if (starts_with(html.substr(i), "<!--")) {
      size_t end = html.find("-->", i + 4);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated comment", static_cast<long>(tag_pos));
      }
      i = end + 3;
      continue;
    }
    if (starts_with(html.substr(i), "<![CDATA[")) {
      size_t end = html.find("]]>", i + 9);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated CDATA section", static_cast<long>(tag_pos));
      }
      i = end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      size_t end = html.find('>', i + 1);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated declaration", static_cast<long>(tag_pos));
      }
      i = end + 1;
      continue;
    }
    if (i + 1 < n && html[i + 1] == '/') {
      i += 2;
      std::string name = detail::read_tag_name(html, i);
      size_t end = html.find('>', i);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated closing tag", static_cast<long>(tag_pos));
      }
      i = end + 1;
      // Pop to the matching element; an unmatched close is ignored.
      long match = -1;
      for (long d = static_cast<long>(stack.size()) - 1; d >= 0; --d) {
        if (stack[static_cast<size_t>(d)].tag == name) {
          match = d;
          break;
        }
      }
      if (match >= 0) {
        while (static_cast<long>(stack.size()) > match) {
          if (stack.back().is_table) --table_depth;
          stack.pop_back();
        }
        boundary();
      }
      continue;
    }
    if (i + 1 < n && std::isalpha(static_cast<unsigned char>(html[i + 1]))) {
      i += 1;
      std::string name = detail::read_tag_name(html, i);
      bool self_closing = false;
      // Attributes: skip to '>', honoring quoted values.
      while (true) {
        if (i >= n) {
          throw ParseError("unterminated tag", static_cast<long>(tag_pos));
        }
        char c = html[i];
        if (c == '"' || c == '\'') {
          size_t end = html.find(c, i + 1);
          if (end == std::string_view::npos) {
            throw ParseError("unterminated attribute value", static_cast<long>(i));
          }
          i = end + 1;
          continue;
        }
        if (c == '>') {
          self_closing = i > 0 && html[i - 1] == '/';
          ++i;
          break;
        }
        ++i;
      }
      if (detail::is_raw_text_element(name)) {
        if (!self_closing) {
          std::string close = "</" + name;
          std::string lowered = to_lower(html.substr(i));
          size_t end = lowered.find(close);
          if (end == std::string_view::npos) {
            throw ParseError("unterminated <" + name + "> element",
                             static_cast<long>(tag_pos));
          }
          size_t gt = html.find('>', i + end);
          if (gt == std::string_view::npos) {
            throw ParseError("unterminated closing tag", static_cast<long>(i + end));
          }
          i = gt + 1;
        }
        continue;
      }
      if (self_closing || detail::is_void_element(name)) {
        boundary();
        continue;
      }
      detail::OpenElement el;
      el.tag = name;
      el.is_table = name == "table";
      if (el.is_table) ++table_depth;
      if (table_depth == 0 && detail::is_candidate_element(name)) {
        el.collector = static_cast<long>(candidates.size());
        candidates.push_back({tag_pos, {}});
      }
      boundary();
      stack.push_back(std::move(el));
      continue;
    }
    // A lone '<' that opens nothing is literal text.
    broadcast("<");
    ++i;
  }

  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (auto& c : candidates) {
    std::string text = collapse_ws(c.text);
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

/// Removes candidates whose text is a substring of another candidate's text
/// (keeping the longer one; among equal texts the first survives), then
/// drops candidates that do not start with a capital letter, which also
/// covers leading periods.
inline std::vector<std::string> dedupe_and_filter(const std::vector<std::string>& in) {
  std::vector<std::string> kept;
  for (size_t i = 0; i < in.size(); ++i) {
    bool drop = false;
    for (size_t j = 0; j < in.size() && !drop; ++j) {
      if (i == j) continue;
      if (in[i] == in[j]) {
        drop = j < i;  // keep the first of equals
      } else if (in[j].find(in[i]) != std::string::npos) {
        drop = true;
      }
    }
    if (!drop) kept.push_back(in[i]);
  }
  std::vector<std::string> out;
  for (auto& text : kept) {
    if (text.empty() || !is_upper(text[0])) continue;
    out.push_back(std::move(text));
  }
  return out;
}

/// Mean + 3 sigma (population sigma) of the text lengths in the batch.
inline double length_cutoff(const std::vector<std::string>& batch) {
  if (batch.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& t : batch) mean += static_cast<double>(t.size());
  mean /= static_cast<double>(batch.size());
  double var = 0.0;
  for (const auto& t : batch) {
    double d = static_cast<double>(t.size()) - mean;
    var += d * d;
  }
  var /= static_cast<double>(batch.size());
  return mean + 3.0 * std::sqrt(var);
}

/// Drops texts longer than mean + 3 sigma of the batch and anything over
/// the hard cap. The statistics are computed over exactly the set passed
/// in, so filtering a subset can keep texts the full batch would drop.
inline std::vector<std::string> filter_lengths(const std::vector<std::string>& in) {
  double cutoff = length_cutoff(in);
  std::vector<std::string> out;
  for (const auto& t : in) {
    if (static_cast<double>(t.size()) > cutoff) continue;
    if (t.size() > kMaxSnippetChars) continue;
    out.push_back(t);
  }
  return out;
}

inline std::vector<FilingEntity> tag_snippet_entities(const std::string& text) {
  std::vector<FilingEntity> entities;
  for (const auto& tag : corpus::tag_regex_kpis(text)) {
    FilingEntity e;
    e.start = tag.start;
    e.end = tag.end;
    e.tag = tag.tag;
    e.unit = tag.tag == "regex_dollar" ? "iso4217:USD" : "xbrli:pure";
    auto v = value::canonical_value(text.substr(tag.start, tag.end - tag.start));
    if (v.is_numeric()) e.numeric_value = v.number;
    entities.push_back(std::move(e));
  }
  return entities;
}

/// Full single-document pipeline: candidate extraction, dedup, the
/// capital-letter filter, then the length filter computed over this
/// document's own snippets. Returns finished snippets with regex-tagged
/// numeric entities and the given metadata stamped on.
inline std::vector<FilingSnippet> parse_filing_html(std::string_view html,
                                                    const FilingMetadata& metadata = {}) {
  auto texts = filter_lengths(dedupe_and_filter(extract_candidates(html)));
  std::vector<FilingSnippet> out;
  out.reserve(texts.size());
  for (auto& text : texts) {
    FilingSnippet s;
    s.form_type = metadata.form_type;
    s.accession_number = metadata.accession_number;
    s.filing_date = metadata.filing_date;
    s.quarter_ending = metadata.quarter_ending;
    s.company_name = metadata.company_name;
    s.entities = tag_snippet_entities(text);
    s.text = std::move(text);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kpix::filing
