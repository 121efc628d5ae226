#pragma once

#include <map>
#include <string>

#include "httplib.h"
#include "kpix/errors.hpp"

namespace kpix::net {

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // includes leading '/', query if any
};

inline Url parse_url(const std::string& url) {
  Url out;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint is not an absolute URL: " + url);
  }
  out.scheme = url.substr(0, scheme_end);
  if (out.scheme != "http" && out.scheme != "https") {
    throw ConfigError("endpoint scheme must be http or https: " + url);
  }
  size_t host_start = scheme_end + 3;
  size_t path_start = url.find('/', host_start);
  std::string authority = path_start == std::string::npos
                              ? url.substr(host_start)
                              : url.substr(host_start, path_start - host_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("endpoint has an invalid port: " + url);
    }
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty()) throw ConfigError("endpoint has an empty host: " + url);
  return out;
}

struct HttpResult {
  bool transport_ok = false;  // false: no HTTP response at all (connect/timeout)
  int status = 0;
  std::string body;
  std::string error;
};

/// POSTs a JSON body and returns whatever came back. Never throws on I/O
/// failure; the caller decides retry policy from the result.
inline HttpResult post_json(const Url& url,
                            const std::map<std::string, std::string>& headers,
                            const std::string& body, double timeout_seconds) {
  HttpResult out;
  if (url.scheme != "http") {
    // TLS is not compiled in; a https endpoint cannot be reached from here.
    out.error = "unsupported URL scheme '" + url.scheme + "' (only http is available)";
    return out;
  }
  httplib::Client client(url.host, url.port);
  auto secs = static_cast<time_t>(timeout_seconds);
  auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers hl;
  for (const auto& [k, v] : headers) hl.emplace(k, v);
  auto res = client.Post(url.path.c_str(), hl, body, "application/json");
  if (!res) {
    out.error = "no response: " + httplib::to_string(res.error());
    return out;
  }
  out.transport_ok = true;
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace kpix::net
