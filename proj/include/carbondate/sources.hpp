#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "carbondate/evidence.hpp"
#include "carbondate/http.hpp"
#include "carbondate/time.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

/// Where each upstream lives, plus optional credentials passed through as
/// query parameters. Request URLs built from these are the cassette keys,
/// so changing a base invalidates recorded cassettes.
struct UpstreamEndpoints {
  /// Memento aggregator; the target URI is appended verbatim.
  std::string timemap_base = "http://timetravel.mementoweb.org/timemap/link/";
  /// Shortener API with /v3/link/lookup and /v3/info.
  std::string shortener_base = "https://api-ssl.bitly.com";
  /// Social search API with /trackbacks.json.
  std::string social_base = "http://otter.topsy.com";
  /// Search API answering ?q=URI (crawl dates) and ?q=link:URI (backlinks).
  std::string search_base = "https://www.googleapis.com/customsearch/v1";

  std::string shortener_token;
  std::string social_apikey;
  std::string search_key;

  /// HEAD the earliest capture of each archive to read the original
  /// Last-Modified the archive replays.
  bool probe_original_headers = true;

  std::string timemap_url(const CanonicalUri& uri) const;
  std::string shortener_lookup_url(const CanonicalUri& uri) const;
  std::string shortener_info_url(const std::string& short_link) const;
  std::string social_url(const CanonicalUri& uri) const;
  std::string search_index_url(const CanonicalUri& uri) const;
  std::string backlinks_url(const CanonicalUri& uri) const;
};

/// Posts per social query; a full page means the first post may be missing.
inline constexpr std::size_t kSocialPageLimit = 500;

struct SourceContext {
  Transport& transport;
  PlausibilityWindow window;
  const UpstreamEndpoints& endpoints;
};

EvidenceResult probe_last_modified(const CanonicalUri& uri, const SourceContext& ctx);
EvidenceResult query_archives(const CanonicalUri& uri, const SourceContext& ctx);
EvidenceResult query_shortener(const CanonicalUri& uri, const SourceContext& ctx);
EvidenceResult query_social(const CanonicalUri& uri, const SourceContext& ctx);
EvidenceResult query_search_index(const CanonicalUri& uri, const SourceContext& ctx);
EvidenceResult query_backlinks(const CanonicalUri& uri, const SourceContext& ctx);

using SourceFn = std::function<EvidenceResult(const CanonicalUri&, const SourceContext&)>;

/// Maps each method to the adapter that implements it, so a defunct upstream
/// can be replaced without touching aggregation.
class SourceRegistry {
 public:
  static SourceRegistry defaults();

  void set(Method m, SourceFn fn) { sources_[m] = std::move(fn); }
  const SourceFn& get(Method m) const;
  bool has(Method m) const { return sources_.count(m) != 0; }

 private:
  std::map<Method, SourceFn> sources_;
};

/// Runs every enabled source, at most `parallelism` at a time. Returns one
/// result per enabled method in method-name order. A source that throws or
/// reports an implausible estimate never affects the others.
/// Throws std::invalid_argument when `enabled` is empty.
std::vector<EvidenceResult> gather_evidence(const CanonicalUri& uri, const SourceContext& ctx,
                                            const std::set<Method>& enabled,
                                            const SourceRegistry& registry = SourceRegistry::defaults(),
                                            std::size_t parallelism = 1);

}  // namespace carbondate
