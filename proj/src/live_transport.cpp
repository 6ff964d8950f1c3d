#include "carbondate/live_transport.hpp"

#include <httplib.h>

#include "carbondate/error.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

LiveTransport::LiveTransport(std::chrono::milliseconds timeout, std::string user_agent)
    : timeout_(timeout), user_agent_(std::move(user_agent)) {}

HttpResponse LiveTransport::send(const HttpRequest& request) {
  auto uri = try_normalize_uri(request.url);
  if (!uri) throw TransportError("cannot request malformed URL " + request.url);

  std::string origin = uri->scheme + "://" + uri->host;
  if (uri->port) origin += ":" + std::to_string(*uri->port);
  std::string target = uri->path;
  if (uri->query) target += "?" + *uri->query;

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_url_encode(false);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  httplib::Headers headers;
  bool has_agent = false;
  for (const auto& [k, v] : request.headers) {
    if (iequals(k, "user-agent")) has_agent = true;
    headers.emplace(k, v);
  }
  if (!has_agent) headers.emplace("User-Agent", user_agent_);

  httplib::Result result;
  if (iequals(request.method, "HEAD"))
    result = client.Head(target, headers);
  else if (iequals(request.method, "GET"))
    result = client.Get(target, headers);
  else
    throw TransportError("unsupported method " + request.method);

  if (!result) throw TransportError(request.method + " " + request.url + ": " + httplib::to_string(result.error()));

  HttpResponse out;
  out.status = result->status;
  for (const auto& [k, v] : result->headers) out.headers.emplace_back(k, v);
  out.body = std::move(result->body);
  return out;
}

}  // namespace carbondate
