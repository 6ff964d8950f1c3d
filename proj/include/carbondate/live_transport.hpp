#pragma once

#include <chrono>
#include <string>

#include "carbondate/http.hpp"

namespace carbondate {

/// Real network access over HTTP and HTTPS. Follows redirects and gives up
/// after `timeout` on connect, read or write. Only GET and HEAD are issued.
class LiveTransport : public Transport {
 public:
  explicit LiveTransport(std::chrono::milliseconds timeout = std::chrono::seconds{10},
                         std::string user_agent = "carbondate/1.0");

  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::milliseconds timeout_;
  std::string user_agent_;
};

}  // namespace carbondate
