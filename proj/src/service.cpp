#include "carbondate/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <thread>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include <httplib.h>

#include "carbondate/error.hpp"
#include "carbondate/live_transport.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

TransportMode parse_mode(std::string_view s) {
  if (s == "live") return TransportMode::live;
  if (s == "replay") return TransportMode::replay;
  if (s == "record") return TransportMode::record;
  throw ConfigError("unknown transport mode '" + std::string(s) + "'");
}

const char* mode_name(TransportMode m) {
  switch (m) {
    case TransportMode::live: return "live";
    case TransportMode::replay: return "replay";
    case TransportMode::record: return "record";
  }
  return "?";
}

std::string error_body(std::string_view raw, std::string_view message) {
  ordered_json j;
  j["URI"] = std::string(raw);
  j["error"] = std::string(message);
  return j.dump(2);
}

}  // namespace

std::set<Method> parse_method_list(std::string_view csv) {
  std::set<Method> out;
  while (!csv.empty()) {
    auto comma = csv.find(',');
    auto item = trim(csv.substr(0, comma));
    if (!item.empty()) out.insert(parse_method(item));
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  return out;
}

ReportStyle parse_report_style(std::string_view s) {
  if (s == "legacy") return ReportStyle::legacy;
  if (s == "generic") return ReportStyle::generic;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

std::pair<std::string, int> parse_listen_address(std::string_view s) {
  std::string host = "127.0.0.1";
  auto colon = s.rfind(':');
  std::string_view port_part = s;
  if (colon != std::string_view::npos) {
    host = std::string(s.substr(0, colon));
    port_part = s.substr(colon + 1);
  }
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
  if (ec != std::errc() || ptr != port_part.data() + port_part.size() || port < 0 || port > 65535 || host.empty())
    throw ConfigError("bad listen address '" + std::string(s) + "'");
  return {host, port};
}

void ServiceConfig::validate() const {
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (enabled.empty()) throw ConfigError("no sources enabled");
  if (mode != TransportMode::live && cassette.empty())
    throw ConfigError(std::string(mode_name(mode)) + " mode needs a cassette path");
  parse_listen_address(listen);
}

ServiceConfig ServiceConfig::from_json(const json& j) {
  ServiceConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("listen")) c.listen = j.at("listen").get<std::string>();
    if (j.contains("sources")) {
      const auto& s = j.at("sources");
      c.enabled.clear();
      if (s.is_string()) {
        c.enabled = parse_method_list(s.get<std::string>());
      } else {
        for (const auto& m : s) c.enabled.insert(parse_method(m.get<std::string>()));
      }
    }
    if (j.contains("timeout_ms")) c.timeout = std::chrono::milliseconds{j.at("timeout_ms").get<long long>()};
    if (j.contains("parallelism")) {
      auto p = j.at("parallelism").get<long long>();
      if (p < 1) throw ConfigError("parallelism must be at least 1");
      c.parallelism = static_cast<std::size_t>(p);
    }
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("cassette")) c.cassette = j.at("cassette").get<std::string>();
    if (j.contains("now") && !j.at("now").is_null()) c.now = parse_iso_timestamp(j.at("now").get<std::string>());
    if (j.contains("format")) c.style = parse_report_style(j.at("format").get<std::string>());
    if (j.contains("cache")) c.cache = j.at("cache").get<bool>();
    if (j.contains("endpoints")) {
      const auto& e = j.at("endpoints");
      auto& ep = c.endpoints;
      ep.timemap_base = e.value("timemap_base", ep.timemap_base);
      ep.shortener_base = e.value("shortener_base", ep.shortener_base);
      ep.social_base = e.value("social_base", ep.social_base);
      ep.search_base = e.value("search_base", ep.search_base);
      ep.shortener_token = e.value("shortener_token", ep.shortener_token);
      ep.social_apikey = e.value("social_apikey", ep.social_apikey);
      ep.search_key = e.value("search_key", ep.search_key);
      ep.probe_original_headers = e.value("probe_original_headers", ep.probe_original_headers);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

ServiceConfig ServiceConfig::from_environment() {
  const char* path = std::getenv("CARBONDATE_CONFIG");
  if (!path || !*path) return ServiceConfig{};
  return from_file(path);
}

Estimator::Estimator(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  switch (config_.mode) {
    case TransportMode::live:
      transport_ = std::make_shared<LiveTransport>(config_.timeout);
      clock_ = config_.now ? fixed_clock(*config_.now) : system_clock();
      break;
    case TransportMode::replay: {
      auto cassette = std::make_shared<const Cassette>(Cassette::load(config_.cassette));
      clock_ = fixed_clock(config_.now ? *config_.now : cassette->recorded_at());
      transport_ = std::make_shared<ReplayTransport>(std::move(cassette));
      break;
    }
    case TransportMode::record: {
      clock_ = config_.now ? fixed_clock(*config_.now) : system_clock();
      recording_ = std::filesystem::exists(config_.cassette)
                       ? std::make_shared<Cassette>(Cassette::load(config_.cassette))
                       : std::make_shared<Cassette>(clock_());
      transport_ = record_passthrough(std::make_shared<LiveTransport>(config_.timeout), recording_);
      break;
    }
  }
  cache_identity_ = std::string(mode_name(config_.mode)) + " " + config_.cassette.string();
}

Estimator::Estimator(ServiceConfig config, std::shared_ptr<Transport> transport, Clock clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {
  if (config_.timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (config_.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (config_.enabled.empty()) throw ConfigError("no sources enabled");
  cache_identity_ = "injected";
}

Estimator::~Estimator() = default;

CreationEstimate Estimator::estimate(const CanonicalUri& uri, std::string requested_uri) const {
  SourceContext ctx{*transport_, PlausibilityWindow::ending_at(clock_()), config_.endpoints};
  auto evidence = gather_evidence(uri, ctx, config_.enabled, registry_, config_.parallelism);
  return aggregate(uri, std::move(evidence), std::move(requested_uri));
}

EstimateResponse Estimator::handle_estimate(std::string_view raw_suffix) const {
  std::string requested = percent_decode(raw_suffix);
  CanonicalUri uri;
  try {
    uri = normalize_uri(requested);
  } catch (const MalformedUri& e) {
    return EstimateResponse{400, "application/json", error_body(requested, e.what())};
  }

  std::string cache_key;
  if (config_.cache) {
    cache_key = cache_identity_ + " " + requested;
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(cache_key); it != cache_.end()) return it->second;
  }

  EstimateResponse resp;
  resp.body = render_report(estimate(uri, requested), config_.style).dump(2);
  if (recording_) save_recording();
  if (config_.cache) {
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(cache_key, resp);
  }
  return resp;
}

void Estimator::run_batch(std::istream& in, std::ostream& out) const {
  std::string line;
  while (std::getline(in, line)) {
    auto raw = trim(line);
    if (raw.empty()) continue;
    ordered_json report;
    try {
      auto uri = normalize_uri(raw);
      report = render_report(estimate(uri, std::string(raw)), config_.style);
    } catch (const std::exception& e) {
      report = ordered_json::object();
      report["URI"] = std::string(raw);
      report["error"] = e.what();
    }
    out << report.dump() << '\n';
  }
  if (recording_) save_recording();
}

void Estimator::save_recording() const {
  if (!recording_) return;
  auto* recorder = dynamic_cast<RecordingTransport*>(transport_.get());
  if (recorder) recorder->snapshot().save(config_.cassette);
}

std::vector<EvalRecord> evaluate_corpus(const Estimator& estimator, std::span<const GoldRecord> gold,
                                        std::size_t workers) {
  std::vector<EvalRecord> out(gold.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < gold.size(); i = next++) {
      auto ce = estimator.estimate(gold[i].uri, gold[i].uri.str());
      out[i] = evaluate(gold[i], ce.evidence);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(gold.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

struct Server::Impl {
  const Estimator& estimator;
  httplib::Server server;

  explicit Impl(const Estimator& e) : estimator(e) {
    server.Get(R"(/cd/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      std::string_view target = req.target;
      auto pos = target.find("/cd/");
      auto suffix = pos == std::string_view::npos ? std::string_view{} : target.substr(pos + 4);
      EstimateResponse r;
      try {
        r = estimator.handle_estimate(suffix);
      } catch (const std::exception& ex) {
        r = EstimateResponse{500, "application/json", error_body(suffix, ex.what())};
      }
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    });
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok\n", "text/plain");
    });
  }
};

Server::Server(const Estimator& estimator) : impl_(std::make_unique<Impl>(estimator)) {}
Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int Server::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool Server::run() { return impl_->server.listen_after_bind(); }
void Server::stop() { impl_->server.stop(); }
void Server::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace carbondate
