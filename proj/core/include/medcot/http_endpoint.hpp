#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medcot {

/// An http(s) base URL split into the part cpp-httplib wants for the client
/// ("http://host:port") and an optional path prefix.
struct Endpoint {
  std::string origin;
  std::string path_prefix;

  /// Throws ConfigError on anything that is not http://... or https://...
  static Endpoint parse(std::string_view url);
  std::string url() const { return origin + path_prefix; }
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{100};
  std::chrono::milliseconds max_delay{5000};
  std::chrono::milliseconds timeout{30000};
  std::uint64_t seed = 0;
};

/// Capped exponential backoff with full jitter: the delay before retry k
/// (0-based) is uniform in [0, min(max_delay, base_delay * 2^k)]. The stream
/// is keyed by (seed, request_key) so it does not depend on scheduling.
std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy,
                                                        std::string_view request_key);

/// POSTs a JSON body and returns the 2xx response body. Connection errors,
/// timeouts, 429 and 5xx are retried; other statuses fail immediately with
/// TransportError. Exhausted retries raise Timeout if the last failure was a
/// timeout, TransportError otherwise.
std::string post_json(const Endpoint& endpoint, std::string_view path, const std::string& body,
                      const RetryPolicy& policy, std::string_view request_key,
                      const std::optional<std::string>& bearer_token = std::nullopt);

}  // namespace medcot
