#include "carbondate/evidence.hpp"

#include "carbondate/error.hpp"

namespace carbondate {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::archives: return "archives";
    case Method::backlinks: return "backlinks";
    case Method::last_modified: return "last_modified";
    case Method::search_index: return "search_index";
    case Method::shortener: return "shortener";
    case Method::social: return "social";
  }
  return "unknown";
}

std::optional<Method> method_from_name(std::string_view name) {
  for (Method m : kAllMethods)
    if (method_name(m) == name) return m;
  return std::nullopt;
}

Method parse_method(std::string_view name) {
  if (auto m = method_from_name(name)) return *m;
  throw UnknownMethod("unknown method '" + std::string(name) + "'");
}

int tie_break_rank(Method m) {
  for (std::size_t i = 0; i < kTieBreakOrder.size(); ++i)
    if (kTieBreakOrder[i] == m) return static_cast<int>(i);
  return static_cast<int>(kTieBreakOrder.size());
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::empty: return "empty";
    case Status::error: return "error";
  }
  return "unknown";
}

Granularity method_granularity(Method m) {
  return m == Method::search_index ? Granularity::day : Granularity::second;
}

EvidenceResult EvidenceResult::ok(Method m, UtcTimestamp t, Granularity g) {
  EvidenceResult r;
  r.method = m;
  r.estimate = t;
  r.granularity = g;
  r.status = Status::ok;
  return r;
}

EvidenceResult EvidenceResult::empty(Method m, Granularity g) {
  EvidenceResult r;
  r.method = m;
  r.granularity = g;
  r.status = Status::empty;
  return r;
}

EvidenceResult EvidenceResult::error(Method m, std::string message, Granularity g) {
  EvidenceResult r;
  r.method = m;
  r.granularity = g;
  r.status = Status::error;
  r.message = std::move(message);
  return r;
}

nlohmann::ordered_json to_json(const EvidenceResult& r) {
  nlohmann::ordered_json j;
  j["method"] = method_name(r.method);
  j["status"] = status_name(r.status);
  if (r.estimate)
    j["estimate"] = r.granularity == Granularity::day ? format_iso_date(truncate_to_day(*r.estimate))
                                                      : format_iso_timestamp(*r.estimate);
  else
    j["estimate"] = nullptr;
  j["granularity"] = r.granularity == Granularity::day ? "day" : "second";
  if (!r.message.empty()) j["message"] = r.message;
  if (!r.confidence_flags.empty()) j["confidence_flags"] = r.confidence_flags;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

}  // namespace carbondate
