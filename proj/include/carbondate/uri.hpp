#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace carbondate {

/// Normalized absolute http(s) identifier of a web resource.
///
/// Produced only by normalize_uri, so two spellings of the same resource
/// (host case, default port, empty path vs "/", fragments) compare equal.
struct CanonicalUri {
  std::string scheme;  // "http" or "https"
  std::string host;    // lowercase
  std::optional<int> port;  // absent when it is the scheme default
  std::string path;    // never empty; starts with '/'
  std::optional<std::string> query;

  std::string str() const;

  friend bool operator==(const CanonicalUri&, const CanonicalUri&) = default;
  friend auto operator<=>(const CanonicalUri& a, const CanonicalUri& b) { return a.str() <=> b.str(); }
};

/// Throws MalformedUri when no http(s) scheme and host can be extracted.
CanonicalUri normalize_uri(std::string_view raw);

/// Non-throwing variant.
std::optional<CanonicalUri> try_normalize_uri(std::string_view raw);

/// Resolves a possibly relative reference against an absolute base.
/// Handles absolute, scheme-relative, root-relative and path-relative forms;
/// dot segments are collapsed. Returns nothing for non-http(s) schemes.
std::optional<std::string> resolve_reference(const CanonicalUri& base, std::string_view ref);

/// RFC 3986 percent-encoding of everything outside the unreserved set.
std::string percent_encode(std::string_view s);

/// Decodes %XX escapes once; malformed escapes are left verbatim.
std::string percent_decode(std::string_view s);

}  // namespace carbondate
