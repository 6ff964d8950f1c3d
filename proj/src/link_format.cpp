#include "carbondate/link_format.hpp"

#include <algorithm>
#include <cctype>

#include "carbondate/http.hpp"

namespace carbondate {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits on `delim` outside of <...> and "..." (with backslash escapes in
// quoted strings). Returns trimmed, possibly empty pieces.
std::vector<std::string_view> split_outside_quotes(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  bool in_quote = false;
  bool in_angle = false;
  bool escape = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_quote) {
      if (escape)
        escape = false;
      else if (c == '\\')
        escape = true;
      else if (c == '"')
        in_quote = false;
    } else if (in_angle) {
      if (c == '>') in_angle = false;
    } else if (c == '"') {
      in_quote = true;
    } else if (c == '<') {
      in_angle = true;
    } else if (c == delim) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::optional<std::string> unquote(std::string_view v) {
  if (v.empty() || v.front() != '"') return std::string(v);
  if (v.size() < 2 || v.back() != '"') return std::nullopt;
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) ++i;
    out.push_back(v[i]);
  }
  return out;
}

std::optional<Link> parse_entry(std::string_view entry) {
  if (entry.empty() || entry.front() != '<') return std::nullopt;
  auto close = entry.find('>');
  if (close == std::string_view::npos) return std::nullopt;
  Link link;
  link.target = std::string(trim(entry.substr(1, close - 1)));
  if (link.target.empty()) return std::nullopt;

  std::string_view rest = trim(entry.substr(close + 1));
  if (rest.empty()) return link;
  if (rest.front() != ';') return std::nullopt;

  auto pieces = split_outside_quotes(rest.substr(1), ';');
  for (auto piece : pieces) {
    if (piece.empty()) continue;
    auto eq = piece.find('=');
    std::string name = lower(trim(piece.substr(0, eq)));
    if (name.empty()) return std::nullopt;
    std::string value;
    if (eq != std::string_view::npos) {
      auto v = unquote(trim(piece.substr(eq + 1)));
      if (!v) return std::nullopt;
      value = *std::move(v);
    }
    link.params.emplace_back(std::move(name), std::move(value));
  }
  return link;
}

}  // namespace

std::optional<std::string> Link::param(std::string_view name) const {
  for (const auto& [k, v] : params)
    if (iequals(k, name)) return v;
  return std::nullopt;
}

bool Link::has_rel(std::string_view type) const {
  auto rel = param("rel");
  if (!rel) return false;
  std::string_view r = *rel;
  std::size_t pos = 0;
  while (pos < r.size()) {
    auto end = r.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = r.size();
    if (iequals(r.substr(pos, end - pos), type)) return true;
    pos = end + 1;
  }
  return false;
}

LinkFormatDocument parse_link_format(std::string_view body) {
  LinkFormatDocument doc;
  for (auto entry : split_outside_quotes(body, ',')) {
    if (entry.empty()) continue;
    if (auto link = parse_entry(entry))
      doc.links.push_back(*std::move(link));
    else
      ++doc.rejected;
  }
  return doc;
}

}  // namespace carbondate
