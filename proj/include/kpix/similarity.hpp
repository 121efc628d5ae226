#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kpix/errors.hpp"
#include "kpix/http.hpp"
#include "kpix/text.hpp"

namespace kpix::sim {

/// Ratcliff/Obershelp similarity on lowercased inputs: 2M / (|a| + |b|),
/// where M is the total length of recursively matched common substrings
/// (longest match first, then the same on both flanks). Two empty strings
/// score 1.0.
inline double gestalt_ratio(std::string_view a_in, std::string_view b_in) {
  std::string a = to_lower(a_in);
  std::string b = to_lower(b_in);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;

  // Positions of each character in b, for the longest-match scan.
  std::unordered_map<char, std::vector<int>> b_positions;
  for (int j = 0; j < static_cast<int>(b.size()); ++j) b_positions[b[j]].push_back(j);

  struct Range {
    int alo, ahi, blo, bhi;
  };
  size_t matched = 0;
  std::vector<Range> stack{{0, static_cast<int>(a.size()), 0, static_cast<int>(b.size())}};
  while (!stack.empty()) {
    Range r = stack.back();
    stack.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    // Longest common substring within the range; ties resolve to the
    // earliest start in a, then in b (first strictly-greater wins).
    std::unordered_map<int, int> j2len;
    int besti = r.alo, bestj = r.blo, bestsize = 0;
    for (int i = r.alo; i < r.ahi; ++i) {
      std::unordered_map<int, int> newj2len;
      auto it = b_positions.find(a[i]);
      if (it != b_positions.end()) {
        for (int j : it->second) {
          if (j < r.blo) continue;
          if (j >= r.bhi) break;
          int k = 1;
          auto prev = j2len.find(j - 1);
          if (prev != j2len.end()) k = prev->second + 1;
          newj2len[j] = k;
          if (k > bestsize) {
            besti = i - k + 1;
            bestj = j - k + 1;
            bestsize = k;
          }
        }
      }
      j2len = std::move(newj2len);
    }
    if (bestsize == 0) continue;
    matched += static_cast<size_t>(bestsize);
    stack.push_back({r.alo, besti, r.blo, bestj});
    stack.push_back({besti + bestsize, r.ahi, bestj + bestsize, r.bhi});
  }
  return 2.0 * static_cast<double>(matched) /
         static_cast<double>(a.size() + b.size());
}

namespace detail {

/// Character trigram multiset of " " + collapse_ws(lower(s)) + " ".
inline std::map<std::string, int> trigram_counts(std::string_view s) {
  std::string padded = " " + collapse_ws(to_lower(s)) + " ";
  std::map<std::string, int> counts;
  if (padded.size() < 3) return counts;
  for (size_t i = 0; i + 3 <= padded.size(); ++i) {
    ++counts[padded.substr(i, 3)];
  }
  return counts;
}

}  // namespace detail

/// Cosine similarity between character-trigram multisets. Inputs are
/// lowercased and whitespace-normalized first, so the score is invariant to
/// case and spacing. Either operand empty after normalization scores 0.0
/// against anything non-equal; identical inputs score 1.0.
inline double lexical_similarity(std::string_view a, std::string_view b) {
  auto ca = detail::trigram_counts(a);
  auto cb = detail::trigram_counts(b);
  if (ca.empty() && cb.empty()) return 1.0;
  if (ca.empty() || cb.empty()) return 0.0;
  double dot = 0.0;
  for (const auto& [gram, na] : ca) {
    auto it = cb.find(gram);
    if (it != cb.end()) dot += static_cast<double>(na) * it->second;
  }
  double norm_a = 0.0, norm_b = 0.0;
  for (const auto& [gram, n] : ca) norm_a += static_cast<double>(n) * n;
  for (const auto& [gram, n] : cb) norm_b += static_cast<double>(n) * n;
  // sqrt of the product (not a product of sqrts) so identical multisets
  // divide S by exactly S and score exactly 1.0.
  double sim = dot / std::sqrt(norm_a * norm_b);
  return std::clamp(sim, 0.0, 1.0);
}

enum class ScorerKind { lexical_fallback, cross_encoder_remote };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::lexical_fallback;
  std::string endpoint;        // remote only
  std::string model;           // remote only
  std::string credential_env;  // remote only; name of the env var, never the key
  int batch_size = 32;
  double timeout_seconds = 30.0;
};

/// Text-pair similarity in [0, 1]. Implementations must be symmetric in
/// expectation and score identical strings as 1.0.
class Scorer {
public:
  virtual ~Scorer() = default;
  virtual double score(std::string_view a, std::string_view b) const = 0;
  virtual std::vector<double> batch_score(
      const std::vector<std::pair<std::string, std::string>>& pairs) const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [a, b] : pairs) out.push_back(score(a, b));
    return out;
  }
  virtual ScorerKind kind() const = 0;
};

class LexicalScorer final : public Scorer {
public:
  double score(std::string_view a, std::string_view b) const override {
    return lexical_similarity(a, b);
  }
  ScorerKind kind() const override { return ScorerKind::lexical_fallback; }
};

/// Cross-encoder served over HTTP. Request: {"model": ..., "pairs":
/// [[a, b], ...]}; response: {"scores": [...]} aligned with the request.
class RemoteScorer final : public Scorer {
public:
  explicit RemoteScorer(ScorerConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
      throw ConfigError("remote scorer requires an endpoint");
    }
    if (config_.batch_size < 1) {
      throw ConfigError("remote scorer batch_size must be >= 1");
    }
    url_ = net::parse_url(config_.endpoint);
  }

  double score(std::string_view a, std::string_view b) const override {
    return batch_score({{std::string(a), std::string(b)}}).front();
  }

  std::vector<double> batch_score(
      const std::vector<std::pair<std::string, std::string>>& pairs) const override {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (size_t begin = 0; begin < pairs.size();
         begin += static_cast<size_t>(config_.batch_size)) {
      size_t end = std::min(pairs.size(), begin + static_cast<size_t>(config_.batch_size));
      auto scores = post_batch(pairs, begin, end);
      out.insert(out.end(), scores.begin(), scores.end());
    }
    return out;
  }

  ScorerKind kind() const override { return ScorerKind::cross_encoder_remote; }

private:
  std::vector<double> post_batch(
      const std::vector<std::pair<std::string, std::string>>& pairs, size_t begin,
      size_t end) const {
    nlohmann::json body;
    if (!config_.model.empty()) body["model"] = config_.model;
    body["pairs"] = nlohmann::json::array();
    for (size_t i = begin; i < end; ++i) {
      body["pairs"].push_back({pairs[i].first, pairs[i].second});
    }
    std::map<std::string, std::string> headers;
    if (!config_.credential_env.empty()) {
      if (const char* key = std::getenv(config_.credential_env.c_str())) {
        headers["Authorization"] = std::string("Bearer ") + key;
      }
    }
    auto res = net::post_json(url_, headers, body.dump(), config_.timeout_seconds);
    if (!res.transport_ok) {
      throw TransportError("scorer endpoint unreachable: " + res.error);
    }
    if (res.status < 200 || res.status >= 300) {
      throw ProviderError("scorer endpoint returned HTTP " + std::to_string(res.status),
                          res.status, res.body);
    }
    auto parsed = nlohmann::json::parse(res.body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("scores") ||
        !parsed["scores"].is_array() || parsed["scores"].size() != end - begin) {
      throw ParseError("scorer response is not a well-formed score array");
    }
    std::vector<double> out;
    out.reserve(end - begin);
    for (const auto& s : parsed["scores"]) {
      if (!s.is_number()) throw ParseError("scorer response contains a non-numeric score");
      out.push_back(std::clamp(s.get<double>(), 0.0, 1.0));
    }
    return out;
  }

  ScorerConfig config_;
  net::Url url_;
};

using ScorerHandle = std::shared_ptr<const Scorer>;

inline ScorerHandle make_scorer(const ScorerConfig& config) {
  if (config.kind == ScorerKind::cross_encoder_remote) {
    return std::make_shared<RemoteScorer>(config);
  }
  return std::make_shared<LexicalScorer>();
}

}  // namespace kpix::sim
