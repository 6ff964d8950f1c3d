#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carbondate/time.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

/// One archived capture of a resource.
struct Memento {
  std::string archive_host;
  std::string capture_uri;
  UtcTimestamp memento_datetime;
  /// Last-Modified of the original resource as replayed by the archive, if any.
  std::optional<UtcTimestamp> original_last_modified;
};

/// Captures of one resource, ascending by memento_datetime; equal datetimes
/// are ordered by archive_host, then capture_uri.
struct Timemap {
  CanonicalUri original;
  std::vector<Memento> mementos;
};

/// Collects every link whose rel contains "memento" and whose datetime
/// attribute parses; other links are ignored. Throws MalformedTimemap when
/// the body contains no parsable link at all.
Timemap parse_timemap(std::string_view body, const CanonicalUri& original);

/// The lowest plausible timestamp a capture vouches for: the smaller of its
/// memento datetime and original Last-Modified, each filtered on its own.
std::optional<UtcTimestamp> plausible_candidate(const Memento& m, const PlausibilityWindow& w);

/// Capture with the smallest plausible candidate, or nothing when every
/// capture is filtered out.
std::optional<Memento> earliest_memento(const Timemap& tm, const PlausibilityWindow& w);

/// True iff some anchor href in `html` refers to `target`. Relative hrefs
/// resolve against `base`; archive-rewritten hrefs such as
/// "/web/20100402000000/http://example.org/" are unwrapped first.
bool contains_link(std::string_view html, const CanonicalUri& target, const CanonicalUri& base);

/// Returns the archived body of a capture; throws on failure.
using CaptureFetcher = std::function<std::string(const Memento&)>;

struct LinkSearchResult {
  std::optional<UtcTimestamp> first_seen;
  std::size_t fetches = 0;
  /// At least one capture could not be fetched and was treated as link-free.
  bool partial_fetch = false;
};

/// Binary search for the earliest capture of a linking page whose body links
/// to `target`. Assumes link presence is monotone over the timemap; when it
/// is not, the answer is an approximation. Fetches at most
/// ceil(log2(n + 1)) captures, which never exceeds ceil(log2(n)) + 1.
LinkSearchResult first_linking_memento(const Timemap& tm, const CanonicalUri& target,
                                       const CaptureFetcher& fetch);

}  // namespace carbondate
