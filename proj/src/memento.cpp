#include "carbondate/memento.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "carbondate/error.hpp"
#include "carbondate/link_format.hpp"

namespace carbondate {

namespace {

bool memento_before(const Memento& a, const Memento& b) {
  if (a.memento_datetime != b.memento_datetime) return a.memento_datetime < b.memento_datetime;
  if (a.archive_host != b.archive_host) return a.archive_host < b.archive_host;
  return a.capture_uri < b.capture_uri;
}

bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
  return true;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

int digit_value(char c, int base) {
  int d = -1;
  if (c >= '0' && c <= '9') d = c - '0';
  else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
  else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
  return d < base ? d : -1;
}

// Named entities that can appear in URLs, plus numeric references in the
// ASCII range.
std::string decode_entities(std::string_view s) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&quot;", '"'}, {"&apos;", '\''}, {"&lt;", '<'}, {"&gt;", '>'}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    if (i + 2 < s.size() && s[i + 1] == '#') {
      bool hex = s[i + 2] == 'x' || s[i + 2] == 'X';
      std::size_t j = i + (hex ? 3 : 2);
      unsigned value = 0;
      std::size_t digits = 0;
      for (; j < s.size() && digits < 7; ++j, ++digits) {
        int d = digit_value(s[j], hex ? 16 : 10);
        if (d < 0) break;
        value = value * (hex ? 16 : 10) + static_cast<unsigned>(d);
      }
      if (digits && value > 0 && value < 128) {
        out.push_back(static_cast<char>(value));
        i = (j < s.size() && s[j] == ';') ? j + 1 : j;
        continue;
      }
    }
    bool replaced = false;
    for (auto [name, ch] : kEntities) {
      if (starts_with_icase(s, i, name)) {
        out.push_back(ch);
        i += name.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(s[i++]);
  }
  return out;
}

// Scans the attributes of one start tag beginning at `pos` (just past the
// tag name). Returns the href value, if any, and leaves `pos` after '>'.
std::optional<std::string> scan_tag_for_href(std::string_view html, std::size_t& pos) {
  std::optional<std::string> href;
  while (pos < html.size()) {
    while (pos < html.size() && (is_space(html[pos]) || html[pos] == '/')) ++pos;
    if (pos >= html.size()) break;
    if (html[pos] == '>') {
      ++pos;
      break;
    }
    std::size_t name_start = pos;
    while (pos < html.size() && !is_space(html[pos]) && html[pos] != '=' && html[pos] != '>') ++pos;
    std::string_view name = html.substr(name_start, pos - name_start);
    while (pos < html.size() && is_space(html[pos])) ++pos;
    if (pos < html.size() && html[pos] == '=') {
      ++pos;
      while (pos < html.size() && is_space(html[pos])) ++pos;
      std::string_view value;
      if (pos < html.size() && (html[pos] == '"' || html[pos] == '\'')) {
        char quote = html[pos++];
        auto end = html.find(quote, pos);
        if (end == std::string_view::npos) end = html.size();
        value = html.substr(pos, end - pos);
        pos = std::min(end + 1, html.size());
      } else {
        std::size_t start = pos;
        while (pos < html.size() && !is_space(html[pos]) && html[pos] != '>') ++pos;
        value = html.substr(start, pos - start);
      }
      if (!href && name.size() == 4 && starts_with_icase(name, 0, "href")) href = decode_entities(value);
    }
  }
  return href;
}

std::vector<std::string> anchor_hrefs(std::string_view html) {
  std::vector<std::string> hrefs;
  std::size_t pos = 0;
  while ((pos = html.find('<', pos)) != std::string_view::npos) {
    if (html.substr(pos, 4) == "<!--") {
      auto end = html.find("-->", pos + 4);
      if (end == std::string_view::npos) break;
      pos = end + 3;
      continue;
    }
    ++pos;
    if (pos + 1 < html.size() && std::tolower(static_cast<unsigned char>(html[pos])) == 'a' &&
        is_space(html[pos + 1])) {
      ++pos;
      if (auto href = scan_tag_for_href(html, pos)) hrefs.push_back(*std::move(href));
    }
  }
  return hrefs;
}

// "http://web.archive.org/web/20100402000000id_/http://example.org/" and
// "/web/20100402000000/http:/example.org/" both unwrap to the embedded URI.
std::string strip_archive_rewrite(const std::string& href) {
  static const std::regex kRewritten(R"((?:^|/)\d{14}[A-Za-z_]*/(https?):/+(.*)$)",
                                     std::regex::ECMAScript | std::regex::icase);
  std::smatch m;
  if (std::regex_search(href, m, kRewritten)) return m[1].str() + "://" + m[2].str();
  return href;
}

}  // namespace

Timemap parse_timemap(std::string_view body, const CanonicalUri& original) {
  auto doc = parse_link_format(body);
  if (doc.links.empty()) throw MalformedTimemap("timemap for " + original.str() + " has no parsable links");

  Timemap tm{original, {}};
  for (const auto& link : doc.links) {
    if (!link.has_rel("memento")) continue;
    auto datetime = link.param("datetime");
    if (!datetime) continue;
    auto capture = try_normalize_uri(link.target);
    if (!capture) continue;
    try {
      tm.mementos.push_back(Memento{capture->host, link.target, parse_http_date(*datetime), std::nullopt});
    } catch (const UnparsableDate&) {
      continue;
    }
  }
  std::sort(tm.mementos.begin(), tm.mementos.end(), memento_before);
  return tm;
}

std::optional<UtcTimestamp> plausible_candidate(const Memento& m, const PlausibilityWindow& w) {
  auto best = filter_plausible(m.memento_datetime, w);
  if (m.original_last_modified) {
    if (auto lm = filter_plausible(*m.original_last_modified, w); lm && (!best || *lm < *best)) best = lm;
  }
  return best;
}

std::optional<Memento> earliest_memento(const Timemap& tm, const PlausibilityWindow& w) {
  const Memento* best = nullptr;
  UtcTimestamp best_time{};
  for (const auto& m : tm.mementos) {
    auto c = plausible_candidate(m, w);
    if (!c) continue;
    // Equal candidates go to the lexicographically smaller archive host.
    if (!best || *c < best_time || (*c == best_time && m.archive_host < best->archive_host)) {
      best = &m;
      best_time = *c;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

bool contains_link(std::string_view html, const CanonicalUri& target, const CanonicalUri& base) {
  for (const auto& raw : anchor_hrefs(html)) {
    std::string href = strip_archive_rewrite(raw);
    auto resolved = resolve_reference(base, href);
    if (!resolved) continue;
    if (auto u = try_normalize_uri(*resolved); u && *u == target) return true;
  }
  return false;
}

LinkSearchResult first_linking_memento(const Timemap& tm, const CanonicalUri& target,
                                       const CaptureFetcher& fetch) {
  LinkSearchResult result;
  const auto& caps = tm.mementos;
  // Invariant: captures before `lo` lack the link; capture `hi` (or the
  // virtual one past the end) has it.
  std::size_t lo = 0;
  std::size_t hi = caps.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    bool present = false;
    ++result.fetches;
    try {
      present = contains_link(fetch(caps[mid]), target, tm.original);
    } catch (const std::exception&) {
      result.partial_fetch = true;
    }
    if (present)
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo < caps.size()) result.first_seen = caps[lo].memento_datetime;
  return result;
}

}  // namespace carbondate
