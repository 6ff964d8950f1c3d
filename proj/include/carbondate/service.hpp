#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "carbondate/aggregate.hpp"
#include "carbondate/cassette.hpp"
#include "carbondate/eval.hpp"
#include "carbondate/evidence.hpp"
#include "carbondate/sources.hpp"
#include "carbondate/time.hpp"

namespace carbondate {

enum class TransportMode { live, replay, record };

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::set<Method> enabled{kAllMethods.begin(), kAllMethods.end()};
  std::chrono::milliseconds timeout{10000};  // per request, live and record only
  std::size_t parallelism = kAllMethods.size();
  TransportMode mode = TransportMode::live;
  std::filesystem::path cassette;  // replay source or record sink
  std::optional<UtcTimestamp> now;
  ReportStyle style = ReportStyle::legacy;
  bool cache = false;
  UpstreamEndpoints endpoints;

  /// Throws ConfigError.
  void validate() const;

  /// Keys mirror the fields: listen, sources (list or comma string),
  /// timeout_ms, parallelism, mode, cassette, now, format, cache, endpoints.
  /// Missing keys keep their defaults. Throws ConfigError.
  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig from_file(const std::filesystem::path& path);
  /// Config named by CARBONDATE_CONFIG, or defaults when it is unset.
  static ServiceConfig from_environment();
};

/// "archives,social" -> {archives, social}. Throws UnknownMethod.
std::set<Method> parse_method_list(std::string_view csv);

ReportStyle parse_report_style(std::string_view s);

/// "host:port"; a bare port binds 127.0.0.1. Throws ConfigError.
std::pair<std::string, int> parse_listen_address(std::string_view s);

struct EstimateResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Estimator {
 public:
  /// Builds the transport the config asks for. Replay mode with no clock
  /// override takes "now" from the cassette's recording time.
  explicit Estimator(ServiceConfig config);
  Estimator(ServiceConfig config, std::shared_ptr<Transport> transport, Clock clock);
  ~Estimator();

  Estimator(const Estimator&) = delete;
  Estimator& operator=(const Estimator&) = delete;

  CreationEstimate estimate(const CanonicalUri& uri, std::string requested_uri = {}) const;

  /// Answers GET /cd/{suffix}. The suffix is percent-decoded once.
  EstimateResponse handle_estimate(std::string_view raw_suffix) const;

  /// One JSON report per non-blank input line, in input order. Lines that
  /// are not URIs produce {"URI": line, "error": message}.
  void run_batch(std::istream& in, std::ostream& out) const;

  /// Writes the record-mode cassette; no-op in other modes.
  void save_recording() const;

  const ServiceConfig& config() const noexcept { return config_; }
  UtcTimestamp now() const { return clock_(); }

 private:
  ServiceConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Cassette> recording_;
  Clock clock_;
  SourceRegistry registry_ = SourceRegistry::defaults();
  std::string cache_identity_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, EstimateResponse> cache_;
};

/// Estimates every gold URI and scores it. Records come back in input order
/// whatever the worker count.
std::vector<EvalRecord> evaluate_corpus(const Estimator& estimator, std::span<const GoldRecord> gold,
                                        std::size_t workers = 1);

/// Serves GET /cd/{uri} and GET /healthz until stop() is called from another
/// thread or the process ends.
class Server {
 public:
  explicit Server(const Estimator& estimator);
  ~Server();

  /// Binds and blocks. Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port on host and returns it; call run() afterwards.
  int bind_any_port(const std::string& host);
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace carbondate
