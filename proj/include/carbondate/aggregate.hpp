#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carbondate/evidence.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

/// Best estimated creation time of one URI: the earliest ok estimate.
struct CreationEstimate {
  CanonicalUri uri;
  /// The URI as the caller spelled it; echoed in reports when set.
  std::string requested_uri;
  std::optional<UtcTimestamp> estimated;
  std::optional<Method> winning_method;
  std::vector<EvidenceResult> evidence;

  const EvidenceResult* find(Method m) const;
};

/// Takes the minimum over ok estimates; equal instants are won by the
/// method that comes first in kTieBreakOrder, regardless of list order.
/// Throws DuplicateMethod when two entries share a method.
CreationEstimate aggregate(const CanonicalUri& uri, std::vector<EvidenceResult> evidence);

/// Same as above, also records how the caller spelled the URI.
CreationEstimate aggregate(const CanonicalUri& uri, std::vector<EvidenceResult> evidence,
                           std::string requested_uri);

enum class ReportStyle {
  legacy,   // "Bitly", "Topsy.com", "Google.com", ...
  generic,  // method names
};

/// Fixed-shape report: every key is always present and absent values are
/// empty strings. Day-granularity values render as "YYYY-MM-DD", all others
/// as "YYYY-MM-DDTHH:MM:SS".
nlohmann::ordered_json render_report(const CreationEstimate& ce, ReportStyle style = ReportStyle::legacy);

/// Values read back from a rendered report.
struct ReportValues {
  std::string uri;
  std::optional<UtcTimestamp> estimated;
  std::optional<UtcTimestamp> archives_earliest;
  std::vector<std::pair<std::string, UtcTimestamp>> by_archive;
  std::vector<std::pair<Method, std::optional<UtcTimestamp>>> methods;

  std::optional<UtcTimestamp> method(Method m) const;
};

/// Inverse of render_report for the values it carries. Throws FormatError.
ReportValues parse_report(const nlohmann::json& report, ReportStyle style = ReportStyle::legacy);

}  // namespace carbondate
