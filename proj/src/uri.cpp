#include "carbondate/uri.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "carbondate/error.hpp"

namespace carbondate {

namespace {

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

bool is_sub_delim_or_gen(unsigned char c) {
  static constexpr std::string_view kAllowed = "!$&'()*+,;=:@/?[]";
  return kAllowed.find(static_cast<char>(c)) != std::string_view::npos;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr char kHex[] = "0123456789ABCDEF";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Uppercases escape hex digits, decodes escaped unreserved characters and
// escapes raw bytes that may not appear in a URI.
std::string normalize_escapes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
        hex_value(s[i + 2]) >= 0) {
      auto decoded = static_cast<unsigned char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      if (is_unreserved(decoded)) {
        out.push_back(static_cast<char>(decoded));
      } else {
        out.push_back('%');
        out.push_back(kHex[decoded >> 4]);
        out.push_back(kHex[decoded & 0xF]);
      }
      i += 2;
    } else if (is_unreserved(c) || is_sub_delim_or_gen(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string_view> segments;
  std::size_t pos = 1;  // path starts with '/'
  bool trailing_slash = false;
  while (pos <= path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    std::string_view seg = path.substr(pos, next - pos);
    trailing_slash = false;
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
      trailing_slash = true;
    } else if (seg == ".") {
      trailing_slash = true;
    } else {
      segments.push_back(seg);
    }
    pos = next + 1;
  }
  std::string out;
  for (auto seg : segments) {
    out.push_back('/');
    out.append(seg);
  }
  if (out.empty() || trailing_slash) out.push_back('/');
  return out;
}

bool valid_host(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[') return host.back() == ']' && host.size() > 2;
  return std::all_of(host.begin(), host.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c >= 0x80;
  });
}

std::optional<CanonicalUri> parse(std::string_view raw) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);

  auto sep = raw.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  CanonicalUri u;
  u.scheme = lower(raw.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;

  std::string_view rest = raw.substr(sep + 3);
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

  std::size_t auth_end = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

  std::string_view host = authority;
  std::string_view port_text;
  std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']', colon) == std::string_view::npos) {
    host = authority.substr(0, colon);
    port_text = authority.substr(colon + 1);
  }
  if (!valid_host(host)) return std::nullopt;
  u.host = lower(host);

  if (!port_text.empty()) {
    int port = 0;
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || p != port_text.data() + port_text.size() || port <= 0 || port > 65535)
      return std::nullopt;
    bool is_default = (u.scheme == "http" && port == 80) || (u.scheme == "https" && port == 443);
    if (!is_default) u.port = port;
  }

  std::string_view path = tail;
  if (auto q = tail.find('?'); q != std::string_view::npos) {
    path = tail.substr(0, q);
    std::string_view query = tail.substr(q + 1);
    if (!query.empty()) u.query = normalize_escapes(query);
  }
  u.path = path.empty() ? "/" : remove_dot_segments(normalize_escapes(path));
  return u;
}

}  // namespace

std::string CanonicalUri::str() const {
  std::string out = scheme + "://" + host;
  if (port) out += ":" + std::to_string(*port);
  out += path;
  if (query) out += "?" + *query;
  return out;
}

CanonicalUri normalize_uri(std::string_view raw) {
  if (auto u = parse(raw)) return *std::move(u);
  throw MalformedUri(std::string(raw));
}

std::optional<CanonicalUri> try_normalize_uri(std::string_view raw) { return parse(raw); }

std::optional<std::string> resolve_reference(const CanonicalUri& base, std::string_view ref) {
  if (auto hash = ref.find('#'); hash != std::string_view::npos) ref = ref.substr(0, hash);
  auto colon = ref.find(':');
  auto first_delim = ref.find_first_of("/?");
  std::string joined;
  if (colon != std::string_view::npos && (first_delim == std::string_view::npos || colon < first_delim)) {
    std::string scheme = lower(ref.substr(0, colon));
    if (scheme != "http" && scheme != "https") return std::nullopt;
    joined = std::string(ref);
  } else {
    std::string origin = base.scheme + "://" + base.host;
    if (base.port) origin += ":" + std::to_string(*base.port);
    if (ref.substr(0, 2) == "//")
      joined = base.scheme + ":" + std::string(ref);
    else if (ref.empty())
      joined = base.str();
    else if (ref.front() == '/')
      joined = origin + std::string(ref);
    else if (ref.front() == '?')
      joined = origin + base.path + std::string(ref);
    else
      joined = origin + base.path.substr(0, base.path.rfind('/') + 1) + std::string(ref);
  }
  auto resolved = try_normalize_uri(joined);
  if (!resolved) return std::nullopt;
  return resolved->str();
}

std::string percent_encode(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    if (is_unreserved(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
        hex_value(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace carbondate
