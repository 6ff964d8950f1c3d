#include "carbondate/aggregate.hpp"

#include <algorithm>

#include "carbondate/error.hpp"

namespace carbondate {

namespace {

struct ReportKeys {
  const char* uri;
  const char* estimated;
  const char* archives;
  const char* earliest;
  const char* by_archive;
};

constexpr ReportKeys kLegacyKeys{"URI", "Estimated Creation Date", "Archives", "Earliest", "By Archive"};
constexpr ReportKeys kGenericKeys{"uri", "estimated_creation_date", "archives", "earliest", "by_archive"};

// Per-method fields in report order; archives has its own object.
constexpr std::array<Method, 5> kReportMethods = {Method::last_modified, Method::shortener, Method::social,
                                                  Method::backlinks, Method::search_index};

const ReportKeys& keys_for(ReportStyle style) { return style == ReportStyle::legacy ? kLegacyKeys : kGenericKeys; }

std::string method_key(Method m, ReportStyle style) {
  if (style == ReportStyle::generic) return std::string(method_name(m));
  switch (m) {
    case Method::last_modified: return "Last Modified";
    case Method::shortener: return "Bitly";
    case Method::social: return "Topsy.com";
    case Method::backlinks: return "Backlinks";
    case Method::search_index: return "Google.com";
    case Method::archives: return "Archives";
  }
  return std::string(method_name(m));
}

std::string render_value(const std::optional<UtcTimestamp>& t, Granularity g) {
  if (!t) return "";
  return g == Granularity::day ? format_iso_date(truncate_to_day(*t)) : format_iso_timestamp(*t);
}

std::optional<UtcTimestamp> read_value(const nlohmann::json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw FormatError("report field '" + key + "' missing or not a string");
  const auto& s = it->get_ref<const std::string&>();
  if (s.empty()) return std::nullopt;
  try {
    return parse_iso_timestamp(s);
  } catch (const UnparsableDate& e) {
    throw FormatError("report field '" + key + "': " + e.what());
  }
}

}  // namespace

const EvidenceResult* CreationEstimate::find(Method m) const {
  for (const auto& e : evidence)
    if (e.method == m) return &e;
  return nullptr;
}

CreationEstimate aggregate(const CanonicalUri& uri, std::vector<EvidenceResult> evidence) {
  return aggregate(uri, std::move(evidence), {});
}

CreationEstimate aggregate(const CanonicalUri& uri, std::vector<EvidenceResult> evidence,
                           std::string requested_uri) {
  std::set<Method> seen;
  for (const auto& e : evidence) {
    if (!seen.insert(e.method).second)
      throw DuplicateMethod("evidence contains method '" + std::string(method_name(e.method)) + "' twice");
  }

  CreationEstimate ce{uri, std::move(requested_uri), std::nullopt, std::nullopt, std::move(evidence)};
  for (const auto& e : ce.evidence) {
    if (e.status != Status::ok || !e.estimate) continue;
    bool better = !ce.estimated || *e.estimate < *ce.estimated ||
                  (*e.estimate == *ce.estimated && tie_break_rank(e.method) < tie_break_rank(*ce.winning_method));
    if (better) {
      ce.estimated = e.estimate;
      ce.winning_method = e.method;
    }
  }
  return ce;
}

nlohmann::ordered_json render_report(const CreationEstimate& ce, ReportStyle style) {
  const auto& keys = keys_for(style);
  nlohmann::ordered_json j;
  j[keys.uri] = ce.requested_uri.empty() ? ce.uri.str() : ce.requested_uri;

  Granularity winner_granularity =
      ce.winning_method ? method_granularity(*ce.winning_method) : Granularity::second;
  j[keys.estimated] = render_value(ce.estimated, winner_granularity);

  for (Method m : kReportMethods) {
    const EvidenceResult* e = ce.find(m);
    std::optional<UtcTimestamp> value;
    if (e && e->status == Status::ok) value = e->estimate;
    j[method_key(m, style)] = render_value(value, method_granularity(m));
  }

  nlohmann::ordered_json archives;
  nlohmann::ordered_json by_archive = nlohmann::ordered_json::object();
  std::optional<UtcTimestamp> earliest;
  if (const EvidenceResult* e = ce.find(Method::archives); e && e->status == Status::ok) {
    earliest = e->estimate;
    if (auto it = e->detail.find("by_archive"); it != e->detail.end()) by_archive = *it;
  }
  archives[keys.earliest] = render_value(earliest, Granularity::second);
  archives[keys.by_archive] = by_archive;
  j[keys.archives] = archives;
  return j;
}

std::optional<UtcTimestamp> ReportValues::method(Method m) const {
  for (const auto& [k, v] : methods)
    if (k == m) return v;
  return std::nullopt;
}

ReportValues parse_report(const nlohmann::json& report, ReportStyle style) {
  const auto& keys = keys_for(style);
  if (!report.is_object()) throw FormatError("report is not a JSON object");
  ReportValues v;
  auto uri = report.find(keys.uri);
  if (uri == report.end() || !uri->is_string()) throw FormatError("report has no URI");
  v.uri = uri->get<std::string>();
  v.estimated = read_value(report, keys.estimated);
  for (Method m : kReportMethods) v.methods.emplace_back(m, read_value(report, method_key(m, style)));

  auto archives = report.find(keys.archives);
  if (archives == report.end() || !archives->is_object()) throw FormatError("report has no archives object");
  v.archives_earliest = read_value(*archives, keys.earliest);
  v.methods.emplace_back(Method::archives, v.archives_earliest);
  auto by = archives->find(keys.by_archive);
  if (by == archives->end() || !by->is_object()) throw FormatError("report has no per-archive map");
  for (const auto& [host, value] : by->items()) {
    if (auto t = read_value(*by, host)) v.by_archive.emplace_back(host, *t);
  }
  return v;
}

}  // namespace carbondate
