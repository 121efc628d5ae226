#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "json.hpp"
#include "kpix/errors.hpp"
#include "kpix/http.hpp"

namespace kpix::provider {

struct ProviderConfig {
  std::string model_id;
  std::string endpoint;
  std::string credential_env;  // env var NAME holding the API key
  int max_retries = 3;
  int parallelism = 4;
  double timeout_seconds = 60.0;
  double backoff_base_ms = 250.0;
  bool supports_schema = true;
  double prompt_price_per_1k = 0.0;
  double completion_price_per_1k = 0.0;
};

struct Completion {
  std::string text;
  int attempts = 1;
  double elapsed_seconds = 0.0;
  double cost_usd = 0.0;
};

/// FNV-1a 64-bit over the full prompt; the replay store's file key.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string prompt_hash(std::string_view prompt) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(prompt);
  return out.str();
}

class Provider {
public:
  virtual ~Provider() = default;
  virtual Completion complete(const std::string& prompt,
                              const nlohmann::json* response_schema = nullptr) const = 0;
  virtual const ProviderConfig& config() const = 0;
};

using ProviderHandle = std::shared_ptr<const Provider>;

/// Chat-completions endpoint speaker. Retries connection failures and
/// HTTP 408/429/5xx with exponential backoff; any other non-2xx status is
/// treated as permanent and raises ProviderError immediately. Cost is
/// computed from the usage block and the configured per-1k token prices.
class HttpProvider final : public Provider {
public:
  explicit HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
      throw ConfigError("provider '" + config_.model_id + "' has no endpoint");
    }
    if (config_.max_retries < 0) {
      throw ConfigError("provider '" + config_.model_id + "' has negative max_retries");
    }
    url_ = net::parse_url(config_.endpoint);
  }

  Completion complete(const std::string& prompt,
                      const nlohmann::json* response_schema = nullptr) const override {
    nlohmann::json body;
    body["model"] = config_.model_id;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "user"}, {"content", prompt}},
    });
    if (response_schema != nullptr && config_.supports_schema) {
      body["response_format"] = {{"type", "json_schema"},
                                 {"json_schema", *response_schema}};
    }
    std::map<std::string, std::string> headers;
    if (!config_.credential_env.empty()) {
      if (const char* key = std::getenv(config_.credential_env.c_str())) {
        headers["Authorization"] = std::string("Bearer ") + key;
      }
    }
    const std::string payload = body.dump();

    auto started = std::chrono::steady_clock::now();
    std::string last_error;
    int attempts = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        double delay = config_.backoff_base_ms * static_cast<double>(1 << (attempt - 1));
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long>(delay)));
      }
      ++attempts;
      auto res = net::post_json(url_, headers, payload, config_.timeout_seconds);
      if (!res.transport_ok) {
        last_error = res.error;
        continue;
      }
      if (res.status == 408 || res.status == 429 || res.status >= 500) {
        last_error = "HTTP " + std::to_string(res.status);
        continue;
      }
      if (res.status < 200 || res.status >= 300) {
        throw ProviderError("provider '" + config_.model_id + "' returned HTTP " +
                                std::to_string(res.status),
                            res.status, res.body);
      }
      Completion out;
      out.attempts = attempts;
      out.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
              .count();
      fill_from_envelope(res.body, out);
      return out;
    }
    throw TransportError("provider '" + config_.model_id + "' unreachable after " +
                             std::to_string(attempts) + " attempts: " + last_error,
                         attempts);
  }

  const ProviderConfig& config() const override { return config_; }

private:
  void fill_from_envelope(const std::string& body, Completion& out) const {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      // A 2xx with a non-JSON body: pass it through as the raw completion.
      out.text = body;
      return;
    }
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty() &&
        j["choices"][0].contains("message") &&
        j["choices"][0]["message"].contains("content") &&
        j["choices"][0]["message"]["content"].is_string()) {
      out.text = j["choices"][0]["message"]["content"].get<std::string>();
    } else if (j.contains("content") && j["content"].is_string()) {
      out.text = j["content"].get<std::string>();
    } else {
      out.text = body;
    }
    if (j.contains("usage") && j["usage"].is_object()) {
      const auto& usage = j["usage"];
      auto tokens = [&](const char* key) {
        auto it = usage.find(key);
        return it != usage.end() && it->is_number() ? it->get<double>() : 0.0;
      };
      out.cost_usd = tokens("prompt_tokens") / 1000.0 * config_.prompt_price_per_1k +
                     tokens("completion_tokens") / 1000.0 *
                         config_.completion_price_per_1k;
    }
  }

  ProviderConfig config_;
  net::Url url_;
};

/// Completion source backed by files on disk, keyed by prompt hash. Replayed
/// completions report zero elapsed time and zero cost so replayed runs are
/// byte-deterministic.
class ReplayProvider final : public Provider {
public:
  ReplayProvider(ProviderConfig config, std::filesystem::path dir)
      : config_(std::move(config)), dir_(std::move(dir)) {}

  Completion complete(const std::string& prompt,
                      const nlohmann::json* /*response_schema*/ = nullptr) const override {
    auto path = entry_path(prompt);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw ProviderError("no replay entry " + path.string() + " for model '" +
                              config_.model_id + "'",
                          0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Completion out;
    out.text = buf.str();
    return out;
  }

  const ProviderConfig& config() const override { return config_; }

  /// Records a response so a later run can replay it.
  void store(const std::string& prompt, std::string_view response) const {
    std::filesystem::create_directories(dir_for_model());
    std::ofstream out(entry_path(prompt), std::ios::binary);
    out << response;
  }

  std::filesystem::path entry_path(const std::string& prompt) const {
    return dir_for_model() / (prompt_hash(prompt) + ".txt");
  }

private:
  std::filesystem::path dir_for_model() const {
    return config_.model_id.empty() ? dir_ : dir_ / config_.model_id;
  }

  ProviderConfig config_;
  std::filesystem::path dir_;
};

inline ProviderHandle make_provider(const ProviderConfig& config,
                                    const std::string& replay_dir = {}) {
  if (!replay_dir.empty()) {
    return std::make_shared<ReplayProvider>(config, replay_dir);
  }
  return std::make_shared<HttpProvider>(config);
}

}  // namespace kpix::provider
