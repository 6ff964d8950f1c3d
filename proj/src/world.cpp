#include "carbondate/world.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>

#include "carbondate/error.hpp"

namespace carbondate {

using ordered_json = nlohmann::ordered_json;
using namespace std::chrono;

namespace {

constexpr std::int64_t kDay = 86400;

constexpr std::array<std::string_view, 3> kArchiveHosts = {"web.archive.org", "wayback.archive-it.org",
                                                           "webarchive.nationalarchives.gov.uk"};

// mt19937_64 output is fully specified by the standard; the mapping below
// is ours, so worlds are identical across standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(rng_() % span);
  }

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 rng_;
};

std::string capture_stamp(UtcTimestamp t) {
  std::string iso = format_iso_timestamp(t);  // YYYY-MM-DDTHH:MM:SS
  std::string out;
  for (char c : iso)
    if (c >= '0' && c <= '9') out.push_back(c);
  return out;
}

std::string capture_uri(std::string_view host, UtcTimestamp t, const CanonicalUri& original) {
  return "http://" + std::string(host) + "/web/" + capture_stamp(t) + "/" + original.str();
}

std::string link_entry(const std::string& target, const std::string& rel, std::optional<UtcTimestamp> dt = {}) {
  std::string s = "<" + target + ">; rel=\"" + rel + "\"";
  if (dt) s += "; datetime=\"" + format_http_date(*dt) + "\"";
  return s;
}

struct Capture {
  std::string host;
  UtcTimestamp at;
};

std::string timemap_body(const CanonicalUri& original, const std::string& self_url,
                         const std::vector<Capture>& captures) {
  std::string body = link_entry(original.str(), "original") + ",\n";
  body += link_entry(self_url, "self") + "; type=\"application/link-format\",\n";
  for (std::size_t i = 0; i < captures.size(); ++i) {
    std::string rel = captures.size() == 1 ? "first last memento"
                      : i == 0             ? "first memento"
                      : i + 1 == captures.size() ? "last memento"
                                                 : "memento";
    body += link_entry(capture_uri(captures[i].host, captures[i].at, original), rel, captures[i].at);
    body += i + 1 == captures.size() ? "\n" : ",\n";
  }
  return body;
}

HttpResponse ok_json(const ordered_json& j) {
  return HttpResponse{200, {{"Content-Type", "application/json"}}, j.dump()};
}

HttpResponse ok_text(std::string content_type, std::string body) {
  return HttpResponse{200, {{"Content-Type", std::move(content_type)}}, std::move(body)};
}

class WorldWriter {
 public:
  WorldWriter(Cassette& cassette, const UpstreamEndpoints& endpoints) : cassette_(cassette), ep_(endpoints) {}

  void put(std::string method, std::string url, HttpResponse response) {
    cassette_.add(Interaction{HttpRequest{std::move(method), std::move(url), {}}, std::move(response), std::nullopt});
  }

  const UpstreamEndpoints& endpoints() const { return ep_; }

 private:
  Cassette& cassette_;
  const UpstreamEndpoints& ep_;
};

void emit_last_modified(WorldWriter& w, const WorldResource& r, UtcTimestamp now) {
  HttpResponse resp{200, {{"Content-Type", "text/html; charset=UTF-8"}, {"Date", format_http_date(now)}}, ""};
  if (auto t = r.source_time(Method::last_modified)) resp.headers.emplace_back("Last-Modified", format_http_date(*t));
  w.put("HEAD", r.uri.str(), std::move(resp));
}

void emit_archives(WorldWriter& w, Draw& draw, const WorldResource& r, UtcTimestamp now) {
  const auto& ep = w.endpoints();
  auto first = r.source_time(Method::archives);
  if (!first) {
    w.put("GET", ep.timemap_url(r.uri), HttpResponse{404, {{"Content-Type", "text/plain"}}, "Not found"});
    return;
  }
  std::vector<Capture> captures;
  captures.push_back({std::string(kArchiveHosts[static_cast<std::size_t>(draw.uniform(0, 2))]), *first});
  UtcTimestamp t = *first;
  for (std::int64_t extra = draw.uniform(0, 3); extra > 0; --extra) {
    t += seconds{draw.uniform(kDay, 90 * kDay)};
    if (t > now) break;
    captures.push_back({std::string(kArchiveHosts[static_cast<std::size_t>(draw.uniform(0, 2))]), t});
  }
  // Occasional archive clock error; the plausibility filter must drop it.
  if (draw.chance(0.1)) {
    UtcTimestamp bogus = sys_days{year{1901} / 12 / 13} + hours{20} + minutes{45} + seconds{52};
    captures.insert(captures.begin(), {std::string(kArchiveHosts[0]), bogus});
  }
  w.put("GET", ep.timemap_url(r.uri),
        ok_text("application/link-format", timemap_body(r.uri, ep.timemap_url(r.uri), captures)));

  if (ep.probe_original_headers) {
    std::set<std::string> probed;
    for (const auto& c : captures) {
      if (c.at < kEarliestPlausible || probed.count(c.host)) continue;
      probed.insert(c.host);
      w.put("HEAD", capture_uri(c.host, c.at, r.uri),
            HttpResponse{200, {{"Memento-Datetime", format_http_date(c.at)}}, ""});
    }
  }
}

std::string short_hash(std::uint64_t seed, std::size_t index) {
  static constexpr char kAlphabet[] = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::uint64_t v = seed * 0x9E3779B97F4A7C15ULL + index + 1;
  std::string out;
  for (int i = 0; i < 6; ++i) {
    out.push_back(kAlphabet[v % 62]);
    v /= 62;
  }
  return out + std::to_string(index);
}

void emit_shortener(WorldWriter& w, const WorldResource& r, std::uint64_t seed, std::size_t index) {
  const auto& ep = w.endpoints();
  ordered_json lookup_entry;
  lookup_entry["url"] = r.uri.str();
  auto t = r.source_time(Method::shortener);
  if (!t) {
    lookup_entry["error"] = "NOT_FOUND";
    w.put("GET", ep.shortener_lookup_url(r.uri),
          ok_json({{"status_code", 200}, {"data", {{"link_lookup", ordered_json::array({lookup_entry})}}}}));
    return;
  }
  std::string hash = short_hash(seed, index);
  std::string link = "http://bit.ly/" + hash;
  lookup_entry["aggregate_link"] = link;
  w.put("GET", ep.shortener_lookup_url(r.uri),
        ok_json({{"status_code", 200}, {"data", {{"link_lookup", ordered_json::array({lookup_entry})}}}}));
  ordered_json info{{"hash", hash}, {"created_at", to_unix_seconds(*t)}};
  w.put("GET", ep.shortener_info_url(link),
        ok_json({{"status_code", 200}, {"data", {{"info", ordered_json::array({info})}}}}));
}

void emit_social(WorldWriter& w, Draw& draw, const WorldResource& r, UtcTimestamp now) {
  ordered_json list = ordered_json::array();
  std::int64_t total = 0;
  if (auto first = r.source_time(Method::social)) {
    std::int64_t posts = draw.uniform(1, 5);
    std::vector<UtcTimestamp> times{*first};
    for (std::int64_t p = 1; p < posts; ++p) {
      UtcTimestamp t = *first + seconds{draw.uniform(60, 30 * kDay)};
      if (t <= now) times.push_back(t);
    }
    // Newest first, as the upstream returns them.
    std::sort(times.rbegin(), times.rend());
    for (std::size_t p = 0; p < times.size(); ++p) {
      list.push_back({{"date", to_unix_seconds(times[p])},
                      {"permalink_url", "http://twitter.com/user" + std::to_string(p) + "/status/" +
                                            std::to_string(to_unix_seconds(times[p]))}});
    }
    total = static_cast<std::int64_t>(times.size()) + draw.uniform(0, 20);
  }
  w.put("GET", w.endpoints().social_url(r.uri), ok_json({{"response", {{"list", list}, {"total", total}}}}));
}

void emit_search_index(WorldWriter& w, const WorldResource& r) {
  ordered_json body;
  if (auto t = r.source_time(Method::search_index)) {
    body["items"] = ordered_json::array({{{"link", r.uri.str()}, {"crawl_date", format_iso_date(truncate_to_day(*t))}}});
  } else {
    body["searchInformation"] = {{"totalResults", "0"}};
  }
  w.put("GET", w.endpoints().search_index_url(r.uri), ok_json(body));
}

std::string page_html(std::size_t page, std::optional<std::string> href) {
  std::string body = "<html><head><title>Links " + std::to_string(page) +
                     "</title></head><body><p>Reading list</p><a href=\"/about\">About</a>";
  if (href) body += "<ul><li><A HREF=\"" + *href + "\">worth reading</A></li></ul>";
  return body + "</body></html>";
}

void emit_backlinks(WorldWriter& w, Draw& draw, const WorldResource& r, std::size_t index, UtcTimestamp now) {
  const auto& ep = w.endpoints();
  auto first = r.source_time(Method::backlinks);
  if (!first) {
    w.put("GET", ep.backlinks_url(r.uri), ok_json({{"searchInformation", {{"totalResults", "0"}}}}));
    return;
  }
  std::size_t pages = static_cast<std::size_t>(draw.uniform(1, 2));
  ordered_json items = ordered_json::array();
  for (std::size_t p = 0; p < pages; ++p) {
    CanonicalUri page = normalize_uri("http://blog" + std::to_string(p) + ".example.net/" + std::to_string(index) +
                                      "/reading-list.html");
    items.push_back({{"link", page.str()}});

    UtcTimestamp link_from = *first;
    if (p > 0) link_from += seconds{draw.uniform(kDay, 200 * kDay)};
    std::int64_t step = draw.uniform(1, 20) * kDay;
    std::int64_t count = draw.uniform(1, 16);
    std::int64_t k = draw.uniform(0, count - 1);

    std::vector<Capture> captures;
    for (std::int64_t c = 0; c < count; ++c) {
      UtcTimestamp at = link_from + seconds{(c - k) * step};
      if (at > now) break;
      captures.push_back({"web.archive.org", at});
    }
    w.put("GET", ep.timemap_url(page), ok_text("application/link-format", timemap_body(page, ep.timemap_url(page), captures)));
    for (std::size_t c = 0; c < captures.size(); ++c) {
      std::optional<std::string> href;
      if (captures[c].at >= link_from) {
        // Alternate between plain and archive-rewritten links.
        href = c % 2 == 0 ? r.uri.str() : "/web/" + capture_stamp(captures[c].at) + "/" + r.uri.str();
      }
      w.put("GET", capture_uri(captures[c].host, captures[c].at, page), ok_text("text/html", page_html(p, href)));
    }
  }
  w.put("GET", ep.backlinks_url(r.uri), ok_json({{"items", items}}));
}

std::optional<std::int64_t> required_int(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::int64_t>();
}

}  // namespace

LagModel LagModel::defaults() {
  LagModel m;
  m.sources[Method::archives] = {0.45, 3600, 400 * kDay};
  m.sources[Method::backlinks] = {0.85, kDay, 730 * kDay};
  m.sources[Method::last_modified] = {0.85, 0, 730 * kDay};
  m.sources[Method::search_index] = {0.40, 0, 30 * kDay};
  m.sources[Method::shortener] = {0.55, 60, 30 * kDay};
  m.sources[Method::social] = {0.50, 60, 3 * kDay};
  return m;
}

LagModel LagModel::zero_lag() {
  LagModel m;
  for (Method method : kAllMethods) m.sources[method] = {0.0, 0, 0};
  return m;
}

void LagModel::validate() const {
  for (const auto& [method, lag] : sources) {
    std::string name(method_name(method));
    if (!(lag.absent_probability >= 0.0 && lag.absent_probability <= 1.0))
      throw InvalidLagModel(name + ": absence probability outside [0, 1]");
    if (lag.min_seconds < 0 || lag.max_seconds < 0) throw InvalidLagModel(name + ": negative lag bound");
    if (lag.min_seconds > lag.max_seconds) throw InvalidLagModel(name + ": min lag exceeds max lag");
  }
  if (!creation_from.ok() || !creation_to.ok() || sys_days{creation_to} < sys_days{creation_from})
    throw InvalidLagModel("creation window is empty");
  if (start_of_day(creation_from) < kEarliestPlausible || start_of_day(creation_to) > now)
    throw InvalidLagModel("creation window must lie inside [1995-01-01, now]");
}

std::optional<UtcTimestamp> WorldResource::source_time(Method m) const {
  auto it = lag_seconds.find(m);
  if (it == lag_seconds.end() || !it->second) return std::nullopt;
  return true_creation + seconds{*it->second};
}

std::optional<UtcTimestamp> WorldResource::expected_estimate() const {
  std::optional<UtcTimestamp> best;
  for (Method m : kAllMethods) {
    auto t = source_time(m);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

GeneratedWorld generate_world(std::uint64_t seed, std::size_t n, const LagModel& model,
                              const UpstreamEndpoints& endpoints) {
  if (n == 0) throw InvalidLagModel("world needs at least one resource");
  model.validate();

  GeneratedWorld out{SyntheticWorld{seed, model, {}}, Cassette(model.now)};
  WorldWriter writer(out.cassette, endpoints);
  Draw draw(seed);

  const auto first_day = sys_days{model.creation_from}.time_since_epoch().count();
  const auto last_day = sys_days{model.creation_to}.time_since_epoch().count();

  for (std::size_t i = 0; i < n; ++i) {
    WorldResource r;
    r.uri = normalize_uri("http://www.site" + std::to_string(i % 37) + ".example.com/" + std::to_string(1000 + i) +
                          "/article.html");
    r.true_creation = sys_days{days{draw.uniform(first_day, last_day)}};
    for (Method m : kAllMethods) {
      SourceLag lag{1.0, 0, 0};
      if (auto it = model.sources.find(m); it != model.sources.end()) lag = it->second;
      bool absent = draw.chance(lag.absent_probability);
      std::int64_t seconds_lag = draw.uniform(lag.min_seconds, lag.max_seconds);
      if (m == Method::search_index) seconds_lag -= seconds_lag % kDay;
      if (absent || r.true_creation + seconds{seconds_lag} > model.now)
        r.lag_seconds[m] = std::nullopt;
      else
        r.lag_seconds[m] = seconds_lag;
    }

    emit_last_modified(writer, r, model.now);
    emit_archives(writer, draw, r, model.now);
    emit_shortener(writer, r, seed, i);
    emit_social(writer, draw, r, model.now);
    emit_search_index(writer, r);
    emit_backlinks(writer, draw, r, i, model.now);
    out.world.resources.push_back(std::move(r));
  }
  return out;
}

ordered_json to_json(const LagModel& model) {
  ordered_json j;
  j["creation_from"] = format_iso_date(model.creation_from);
  j["creation_to"] = format_iso_date(model.creation_to);
  j["now"] = format_iso_timestamp(model.now) + "Z";
  ordered_json sources = ordered_json::object();
  for (const auto& [m, lag] : model.sources) {
    sources[std::string(method_name(m))] = {{"absent_probability", lag.absent_probability},
                                            {"min_seconds", lag.min_seconds},
                                            {"max_seconds", lag.max_seconds}};
  }
  j["sources"] = sources;
  return j;
}

LagModel lag_model_from_json(const nlohmann::json& j) {
  LagModel m;
  try {
    if (j.contains("creation_from")) m.creation_from = parse_iso_date(j.at("creation_from").get<std::string>());
    if (j.contains("creation_to")) m.creation_to = parse_iso_date(j.at("creation_to").get<std::string>());
    if (j.contains("now")) m.now = parse_iso_timestamp(j.at("now").get<std::string>());
    if (auto s = j.find("sources"); s != j.end()) {
      for (const auto& [name, lag] : s->items()) {
        m.sources[parse_method(name)] = {lag.value("absent_probability", 0.0), lag.value("min_seconds", std::int64_t{0}),
                                         lag.value("max_seconds", std::int64_t{0})};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidLagModel(std::string("lag model: ") + e.what());
  } catch (const UnparsableDate& e) {
    throw InvalidLagModel(std::string("lag model: ") + e.what());
  }
  return m;
}

ordered_json to_json(const SyntheticWorld& world) {
  ordered_json j;
  j["seed"] = world.seed;
  j["lag_model"] = to_json(world.model);
  ordered_json resources = ordered_json::array();
  for (const auto& r : world.resources) {
    ordered_json entry;
    entry["uri"] = r.uri.str();
    entry["true_creation"] = format_iso_timestamp(r.true_creation) + "Z";
    ordered_json sources = ordered_json::object();
    for (Method m : kAllMethods) {
      auto t = r.source_time(m);
      if (!t) {
        sources[std::string(method_name(m))] = nullptr;
        continue;
      }
      sources[std::string(method_name(m))] = {{"lag_seconds", *r.lag_seconds.at(m)},
                                              {"timestamp", format_iso_timestamp(*t) + "Z"}};
    }
    entry["sources"] = sources;
    if (auto e = r.expected_estimate()) entry["expected_estimate"] = format_iso_timestamp(*e) + "Z";
    else entry["expected_estimate"] = nullptr;
    resources.push_back(entry);
  }
  j["resources"] = resources;
  return j;
}

SyntheticWorld world_from_json(const nlohmann::json& j) {
  SyntheticWorld w;
  try {
    w.seed = j.at("seed").get<std::uint64_t>();
    w.model = lag_model_from_json(j.at("lag_model"));
    for (const auto& entry : j.at("resources")) {
      WorldResource r;
      r.uri = normalize_uri(entry.at("uri").get<std::string>());
      r.true_creation = parse_iso_timestamp(entry.at("true_creation").get<std::string>());
      const auto& sources = entry.at("sources");
      for (Method m : kAllMethods) {
        auto it = sources.find(std::string(method_name(m)));
        r.lag_seconds[m] = (it == sources.end() || it->is_null()) ? std::nullopt : required_int(*it, "lag_seconds");
      }
      w.resources.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("world descriptor: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(std::string("world descriptor: ") + e.what());
  }
  return w;
}

}  // namespace carbondate
