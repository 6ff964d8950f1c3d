#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace carbondate {

/// Ordered header list; names compare case-insensitively on lookup.
using Headers = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string> header_value(const Headers& headers, std::string_view name);

bool iequals(std::string_view a, std::string_view b);

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  Headers headers;
};

struct HttpResponse {
  int status = 0;
  Headers headers;
  std::string body;
};

/// Anything that can answer an HTTP request: the live network, a cassette
/// replay, or a recorder wrapping either. Implementations must be safe to
/// call from several threads at once. Failures throw TransportError.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

}  // namespace carbondate
