#include "medcot/http_endpoint.hpp"

#include <algorithm>
#include <thread>

#include "httplib.h"
#include "medcot/encoding.hpp"
#include "medcot/error.hpp"

namespace medcot {

Endpoint Endpoint::parse(std::string_view url) {
  std::string_view rest;
  std::string_view scheme;
  if (url.starts_with("http://")) {
    scheme = "http://";
  } else if (url.starts_with("https://")) {
    scheme = "https://";
  } else {
    throw Error(ErrorCode::ConfigError, "endpoint must start with http:// or https://: " + std::string(url));
  }
  rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  const auto authority = rest.substr(0, slash);
  if (authority.empty()) throw Error(ErrorCode::ConfigError, "endpoint has no host: " + std::string(url));
  Endpoint e;
  e.origin = std::string(scheme) + std::string(authority);
  if (slash != std::string_view::npos) {
    e.path_prefix = std::string(rest.substr(slash));
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
  }
  return e;
}

std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy,
                                                        std::string_view request_key) {
  std::vector<std::chrono::milliseconds> delays;
  SplitMix64 rng(derive_seed(policy.seed, fnv1a64(request_key)));
  for (int k = 0; k + 1 < policy.max_attempts; ++k) {
    const auto shift = std::min(k, 30);
    const auto ceiling = std::min<std::int64_t>(policy.max_delay.count(),
                                                policy.base_delay.count() * (std::int64_t{1} << shift));
    const auto ms = static_cast<std::int64_t>(rng.next_unit() * static_cast<double>(ceiling + 1));
    delays.emplace_back(std::min(ms, ceiling));
  }
  return delays;
}

std::string post_json(const Endpoint& endpoint, std::string_view path, const std::string& body,
                      const RetryPolicy& policy, std::string_view request_key,
                      const std::optional<std::string>& bearer_token) {
  httplib::Client client(endpoint.origin);
  const auto timeout_s = policy.timeout.count() / 1000;
  const auto timeout_us = (policy.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);
  client.set_write_timeout(timeout_s, timeout_us);
  if (bearer_token) client.set_bearer_token_auth(*bearer_token);

  const auto full_path = endpoint.path_prefix + std::string(path);
  const auto delays = backoff_schedule(policy, request_key);
  const int attempts = std::max(1, policy.max_attempts);

  bool last_was_timeout = false;
  int last_status = 0;
  std::string last_message;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(delays[static_cast<std::size_t>(attempt - 1)]);
    auto res = client.Post(full_path, body, "application/json");
    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::Read || err == httplib::Error::Write ||
                         err == httplib::Error::ConnectionTimeout;
      last_status = 0;
      last_message = httplib::to_string(err);
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_was_timeout = false;
    last_status = res->status;
    last_message = "HTTP " + std::to_string(res->status) + ": " + res->body;
    if (res->status != 429 && res->status < 500) throw TransportError(res->status, last_message);
  }
  const auto where = endpoint.url() + std::string(path) + " after " + std::to_string(attempts) + " attempts";
  if (last_was_timeout) throw Error(ErrorCode::Timeout, where + ": " + last_message);
  throw TransportError(last_status, where + ": " + last_message);
}

}  // namespace medcot
