#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "carbondate/time.hpp"

namespace carbondate {

/// The six dating methods. Names returned by method_name are stable and are
/// used as registry keys, config values and JSON keys.
enum class Method { archives, backlinks, last_modified, search_index, shortener, social };

/// Sorted by method name; this is the order gather_evidence reports in.
inline constexpr std::array<Method, 6> kAllMethods = {Method::archives,     Method::backlinks,
                                                      Method::last_modified, Method::search_index,
                                                      Method::shortener,    Method::social};

/// Tie-break priority when two methods report the same instant.
inline constexpr std::array<Method, 6> kTieBreakOrder = {Method::archives, Method::last_modified,
                                                         Method::shortener, Method::social,
                                                         Method::backlinks, Method::search_index};

std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

/// Throws UnknownMethod.
Method parse_method(std::string_view name);

/// Position of `m` in kTieBreakOrder.
int tie_break_rank(Method m);

enum class Granularity { second, day };
enum class Status { ok, empty, error };

std::string_view status_name(Status s);

inline constexpr std::string_view kFlagPartialFetch = "partial_fetch";
inline constexpr std::string_view kFlagClippedWindow = "clipped_window";
inline constexpr std::string_view kFlagNonMonotoneBacklink = "non_monotone_backlink";

/// One method's vote. `estimate` is present exactly when status is ok and
/// has already passed the plausibility filter.
struct EvidenceResult {
  Method method = Method::archives;
  std::optional<UtcTimestamp> estimate;
  Granularity granularity = Granularity::second;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
  Status status = Status::empty;
  std::string message;
  std::set<std::string> confidence_flags;

  static EvidenceResult ok(Method m, UtcTimestamp t, Granularity g = Granularity::second);
  static EvidenceResult empty(Method m, Granularity g = Granularity::second);
  static EvidenceResult error(Method m, std::string message, Granularity g = Granularity::second);
};

/// Granularity a method reports at: day for the search index, second otherwise.
Granularity method_granularity(Method m);

nlohmann::ordered_json to_json(const EvidenceResult& r);

}  // namespace carbondate
