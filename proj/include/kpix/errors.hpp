#pragma once

#include <stdexcept>
#include <string>

namespace kpix {

/// Invalid or inconsistent pipeline configuration. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An input record that cannot enter the pipeline (missing metadata, bad file).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed content that was expected to be parseable. Carries the byte
/// offset of the first unparseable construct when one is known (-1 otherwise).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what, long offset = -1)
      : std::runtime_error(what), offset_(offset) {}
  long offset() const { return offset_; }

private:
  long offset_;
};

/// Structurally valid JSON that does not follow the expected response schema.
class SchemaError : public ParseError {
public:
  explicit SchemaError(const std::string& what) : ParseError(what) {}
};

/// Network-level failure after retries were exhausted.
class TransportError : public std::runtime_error {
public:
  explicit TransportError(const std::string& what, int attempts = 0)
      : std::runtime_error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

private:
  int attempts_;
};

/// Non-retryable provider response (auth failure, bad request, missing replay
/// entry). Carries the HTTP status when one exists, 0 otherwise.
class ProviderError : public std::runtime_error {
public:
  ProviderError(const std::string& what, int status, std::string body = {})
      : std::runtime_error(what), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

private:
  int status_;
  std::string body_;
};

/// A statistic whose value is undefined for the given inputs (e.g. zero
/// expected disagreement with nonzero observed disagreement).
class UndefinedMetricError : public std::runtime_error {
public:
  explicit UndefinedMetricError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kpix
