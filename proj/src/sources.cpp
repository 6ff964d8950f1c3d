#include "carbondate/sources.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "carbondate/error.hpp"
#include "carbondate/memento.hpp"

namespace carbondate {

using json = nlohmann::json;

namespace {

std::string with_param(std::string url, std::string_view name, const std::string& value) {
  if (value.empty()) return url;
  url += url.find('?') == std::string::npos ? '?' : '&';
  url += name;
  url += '=';
  url += percent_encode(value);
  return url;
}

HttpResponse send(const SourceContext& ctx, std::string method, std::string url) {
  return ctx.transport.send(HttpRequest{std::move(method), std::move(url), {}});
}

bool is_success(int status) { return status >= 200 && status < 300; }

std::string upstream_failure(const HttpResponse& r) {
  return "upstream returned status " + std::to_string(r.status);
}

// Epoch seconds may arrive as a number or a numeric string.
std::optional<UtcTimestamp> epoch_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (it->is_number_integer()) return from_unix_seconds(it->get<std::int64_t>());
  if (it->is_number()) return from_unix_seconds(static_cast<std::int64_t>(it->get<double>()));
  if (it->is_string()) {
    try {
      return from_unix_seconds(std::stoll(it->get<std::string>()));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Reads X-Archive-Orig-Last-Modified from the earliest capture of every
// archive. Returns false when any probe failed.
bool attach_original_last_modified(Timemap& tm, const SourceContext& ctx) {
  bool complete = true;
  std::set<std::string> probed;
  for (auto& m : tm.mementos) {
    if (!ctx.window.contains(m.memento_datetime) || probed.count(m.archive_host)) continue;
    probed.insert(m.archive_host);
    try {
      auto r = send(ctx, "HEAD", m.capture_uri);
      if (!is_success(r.status)) continue;
      if (auto lm = header_value(r.headers, "X-Archive-Orig-Last-Modified")) {
        try {
          m.original_last_modified = parse_http_date(*lm);
        } catch (const UnparsableDate&) {
        }
      }
    } catch (const TransportError&) {
      complete = false;
    }
  }
  return complete;
}

}  // namespace

std::string UpstreamEndpoints::timemap_url(const CanonicalUri& uri) const { return timemap_base + uri.str(); }

std::string UpstreamEndpoints::shortener_lookup_url(const CanonicalUri& uri) const {
  return with_param(shortener_base + "/v3/link/lookup?url=" + percent_encode(uri.str()), "access_token",
                    shortener_token);
}

std::string UpstreamEndpoints::shortener_info_url(const std::string& short_link) const {
  return with_param(shortener_base + "/v3/info?shortUrl=" + percent_encode(short_link), "access_token",
                    shortener_token);
}

std::string UpstreamEndpoints::social_url(const CanonicalUri& uri) const {
  return with_param(social_base + "/trackbacks.json?url=" + percent_encode(uri.str()) +
                        "&perpage=" + std::to_string(kSocialPageLimit),
                    "apikey", social_apikey);
}

std::string UpstreamEndpoints::search_index_url(const CanonicalUri& uri) const {
  return with_param(search_base + "?q=" + percent_encode(uri.str()) + "&dateRestrict=y15", "key", search_key);
}

std::string UpstreamEndpoints::backlinks_url(const CanonicalUri& uri) const {
  return with_param(search_base + "?q=" + percent_encode("link:" + uri.str()), "key", search_key);
}

EvidenceResult probe_last_modified(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::last_modified;
  HttpResponse r;
  try {
    r = send(ctx, "HEAD", uri.str());
  } catch (const TransportError& e) {
    return EvidenceResult::error(kMethod, e.what());
  }
  if (r.status >= 500) return EvidenceResult::error(kMethod, upstream_failure(r));

  auto header = header_value(r.headers, "Last-Modified");
  if (!header) return EvidenceResult::empty(kMethod);
  EvidenceResult result = EvidenceResult::empty(kMethod);
  result.detail["header"] = *header;
  try {
    if (auto t = filter_plausible(parse_http_date(*header), ctx.window)) {
      result.status = Status::ok;
      result.estimate = *t;
    }
  } catch (const UnparsableDate&) {
    result.message = "unparsable Last-Modified header";
  }
  return result;
}

EvidenceResult query_archives(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::archives;
  Timemap tm;
  EvidenceResult result = EvidenceResult::empty(kMethod);
  try {
    auto r = send(ctx, "GET", ctx.endpoints.timemap_url(uri));
    if (r.status == 404) return result;
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, upstream_failure(r));
    tm = parse_timemap(r.body, uri);
    if (ctx.endpoints.probe_original_headers && !attach_original_last_modified(tm, ctx))
      result.confidence_flags.insert(std::string(kFlagPartialFetch));
  } catch (const Error& e) {
    return EvidenceResult::error(kMethod, e.what());
  }

  // Group by archive, keeping each host at the position of its earliest capture.
  std::vector<std::pair<std::string, Timemap>> groups;
  for (const auto& m : tm.mementos) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == m.archive_host; });
    if (it == groups.end()) {
      groups.emplace_back(m.archive_host, Timemap{uri, {}});
      it = std::prev(groups.end());
    }
    it->second.mementos.push_back(m);
  }

  std::vector<std::pair<std::string, UtcTimestamp>> per_archive;
  for (const auto& [host, group] : groups) {
    if (auto e = earliest_memento(group, ctx.window))
      per_archive.emplace_back(host, *plausible_candidate(*e, ctx.window));
  }
  std::stable_sort(per_archive.begin(), per_archive.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });

  nlohmann::ordered_json by_archive = nlohmann::ordered_json::object();
  for (const auto& [host, t] : per_archive) by_archive[host] = format_iso_timestamp(t);
  result.detail["mementos"] = tm.mementos.size();
  result.detail["by_archive"] = by_archive;

  if (auto e = earliest_memento(tm, ctx.window)) {
    result.status = Status::ok;
    result.estimate = plausible_candidate(*e, ctx.window);
    result.detail["earliest_capture"] = e->capture_uri;
  }
  return result;
}

EvidenceResult query_shortener(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::shortener;
  std::string short_link;
  try {
    auto r = send(ctx, "GET", ctx.endpoints.shortener_lookup_url(uri));
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, "lookup: " + upstream_failure(r));
    auto body = json::parse(r.body);
    const auto& lookups = body.at("data").at("link_lookup");
    for (const auto& entry : lookups) {
      if (auto it = entry.find("aggregate_link"); it != entry.end() && it->is_string()) {
        short_link = it->get<std::string>();
        break;
      }
    }
  } catch (const TransportError& e) {
    return EvidenceResult::error(kMethod, std::string("lookup: ") + e.what());
  } catch (const json::exception& e) {
    return EvidenceResult::error(kMethod, std::string("lookup: malformed response: ") + e.what());
  }
  if (short_link.empty()) return EvidenceResult::empty(kMethod);

  EvidenceResult result = EvidenceResult::empty(kMethod);
  result.detail["aggregate_link"] = short_link;
  try {
    auto r = send(ctx, "GET", ctx.endpoints.shortener_info_url(short_link));
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, "info: " + upstream_failure(r));
    auto body = json::parse(r.body);
    std::optional<UtcTimestamp> created;
    for (const auto& entry : body.at("data").at("info")) {
      if (auto t = epoch_field(entry, "created_at")) created = created ? std::min(*created, *t) : *t;
    }
    if (created) {
      if (auto t = filter_plausible(*created, ctx.window)) {
        result.status = Status::ok;
        result.estimate = *t;
      }
    }
  } catch (const TransportError& e) {
    auto err = EvidenceResult::error(kMethod, std::string("info: ") + e.what());
    err.detail = result.detail;
    return err;
  } catch (const json::exception& e) {
    return EvidenceResult::error(kMethod, std::string("info: malformed response: ") + e.what());
  }
  return result;
}

EvidenceResult query_social(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::social;
  EvidenceResult result = EvidenceResult::empty(kMethod);
  try {
    auto r = send(ctx, "GET", ctx.endpoints.social_url(uri));
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, upstream_failure(r));
    auto body = json::parse(r.body);
    const auto& response = body.at("response");
    const auto& posts = response.at("list");
    std::optional<UtcTimestamp> first;
    std::size_t plausible = 0;
    for (const auto& post : posts) {
      auto t = epoch_field(post, "date");
      if (!t || !ctx.window.contains(*t)) continue;
      ++plausible;
      if (!first || *t < *first) first = *t;
    }
    result.detail["returned"] = posts.size();
    if (auto total = response.find("total"); total != response.end() && total->is_number_integer())
      result.detail["total"] = total->get<std::int64_t>();
    if (posts.size() >= kSocialPageLimit) result.confidence_flags.insert(std::string(kFlagClippedWindow));
    if (first) {
      result.status = Status::ok;
      result.estimate = *first;
    }
  } catch (const TransportError& e) {
    return EvidenceResult::error(kMethod, e.what());
  } catch (const json::exception& e) {
    return EvidenceResult::error(kMethod, std::string("malformed response: ") + e.what());
  }
  return result;
}

EvidenceResult query_search_index(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::search_index;
  constexpr Granularity kDay = Granularity::day;
  EvidenceResult result = EvidenceResult::empty(kMethod, kDay);
  try {
    auto r = send(ctx, "GET", ctx.endpoints.search_index_url(uri));
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, upstream_failure(r), kDay);
    auto body = json::parse(r.body);
    auto items = body.find("items");
    if (items == body.end()) return result;
    for (const auto& item : *items) {
      auto link = try_normalize_uri(item.value("link", ""));
      if (!link || *link != uri) continue;
      auto crawl = item.find("crawl_date");
      if (crawl == item.end() || !crawl->is_string()) continue;
      result.detail["crawl_date"] = *crawl;
      DayDate day = parse_iso_date(crawl->get<std::string>());
      if (auto t = filter_plausible(start_of_day(day), ctx.window)) {
        result.status = Status::ok;
        result.estimate = *t;
      }
      break;
    }
  } catch (const Error& e) {
    return EvidenceResult::error(kMethod, e.what(), kDay);
  } catch (const json::exception& e) {
    return EvidenceResult::error(kMethod, std::string("malformed response: ") + e.what(), kDay);
  }
  return result;
}

EvidenceResult query_backlinks(const CanonicalUri& uri, const SourceContext& ctx) {
  constexpr Method kMethod = Method::backlinks;
  std::vector<CanonicalUri> backlinks;
  try {
    auto r = send(ctx, "GET", ctx.endpoints.backlinks_url(uri));
    if (!is_success(r.status)) return EvidenceResult::error(kMethod, upstream_failure(r));
    auto body = json::parse(r.body);
    if (auto items = body.find("items"); items != body.end()) {
      for (const auto& item : *items) {
        auto link = try_normalize_uri(item.value("link", ""));
        if (!link || *link == uri) continue;
        if (std::find(backlinks.begin(), backlinks.end(), *link) == backlinks.end())
          backlinks.push_back(*std::move(link));
      }
    }
  } catch (const TransportError& e) {
    return EvidenceResult::error(kMethod, e.what());
  } catch (const json::exception& e) {
    return EvidenceResult::error(kMethod, std::string("malformed response: ") + e.what());
  }

  EvidenceResult result = EvidenceResult::empty(kMethod);
  result.detail["backlinks"] = backlinks.size();
  nlohmann::ordered_json first_seen = nlohmann::ordered_json::object();
  std::size_t fetches = 0;

  CaptureFetcher fetch = [&](const Memento& m) {
    auto r = send(ctx, "GET", m.capture_uri);
    if (!is_success(r.status)) throw TransportError(upstream_failure(r) + " for " + m.capture_uri);
    return r.body;
  };

  for (const auto& page : backlinks) {
    Timemap tm;
    try {
      auto r = send(ctx, "GET", ctx.endpoints.timemap_url(page));
      if (r.status == 404) continue;
      if (!is_success(r.status)) throw TransportError(upstream_failure(r));
      tm = parse_timemap(r.body, page);
    } catch (const Error&) {
      result.confidence_flags.insert(std::string(kFlagPartialFetch));
      continue;
    }
    auto search = first_linking_memento(tm, uri, fetch);
    fetches += search.fetches;
    if (search.partial_fetch) result.confidence_flags.insert(std::string(kFlagPartialFetch));
    if (!search.first_seen) continue;
    auto t = filter_plausible(*search.first_seen, ctx.window);
    if (!t) continue;
    first_seen[page.str()] = format_iso_timestamp(*t);
    if (!result.estimate || *t < *result.estimate) {
      result.estimate = *t;
      result.status = Status::ok;
    }
  }
  result.detail["fetches"] = fetches;
  result.detail["first_seen"] = first_seen;
  return result;
}

SourceRegistry SourceRegistry::defaults() {
  SourceRegistry r;
  r.set(Method::archives, query_archives);
  r.set(Method::backlinks, query_backlinks);
  r.set(Method::last_modified, probe_last_modified);
  r.set(Method::search_index, query_search_index);
  r.set(Method::shortener, query_shortener);
  r.set(Method::social, query_social);
  return r;
}

const SourceFn& SourceRegistry::get(Method m) const {
  auto it = sources_.find(m);
  if (it == sources_.end()) throw UnknownMethod("no source registered for " + std::string(method_name(m)));
  return it->second;
}

namespace {

EvidenceResult run_isolated(Method m, const CanonicalUri& uri, const SourceContext& ctx,
                            const SourceRegistry& registry) {
  EvidenceResult r;
  try {
    r = registry.get(m)(uri, ctx);
  } catch (const std::exception& e) {
    return EvidenceResult::error(m, e.what(), method_granularity(m));
  }
  r.method = m;
  if (r.status == Status::ok && (!r.estimate || !ctx.window.contains(*r.estimate))) {
    r.status = Status::empty;
    r.message = "implausible estimate discarded";
  }
  if (r.status != Status::ok) r.estimate.reset();
  return r;
}

}  // namespace

std::vector<EvidenceResult> gather_evidence(const CanonicalUri& uri, const SourceContext& ctx,
                                            const std::set<Method>& enabled, const SourceRegistry& registry,
                                            std::size_t parallelism) {
  if (enabled.empty()) throw std::invalid_argument("gather_evidence: no methods enabled");

  // std::set<Method> iterates in enum order, which is method-name order.
  std::vector<Method> methods(enabled.begin(), enabled.end());
  std::vector<EvidenceResult> results(methods.size());

  std::size_t workers = std::clamp<std::size_t>(parallelism, 1, methods.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < methods.size(); ++i) results[i] = run_isolated(methods[i], uri, ctx, registry);
    return results;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < methods.size(); i = next++)
      results[i] = run_isolated(methods[i], uri, ctx, registry);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace carbondate
