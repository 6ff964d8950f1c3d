#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace carbondate {

/// One entry of an application/link-format document:
///   <target>; name="value"; name=token
struct Link {
  std::string target;
  std::vector<std::pair<std::string, std::string>> params;  // names lowercased

  std::optional<std::string> param(std::string_view name) const;

  /// True when the space-separated rel parameter contains `type`
  /// (case-insensitive), e.g. rel="first memento" has "memento".
  bool has_rel(std::string_view type) const;
};

struct LinkFormatDocument {
  std::vector<Link> links;
  std::size_t rejected = 0;  // entries that did not parse
};

/// Lenient parser: entries that fail to parse are counted and skipped.
LinkFormatDocument parse_link_format(std::string_view body);

}  // namespace carbondate
