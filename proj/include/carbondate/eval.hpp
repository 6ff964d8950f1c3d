#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carbondate/evidence.hpp"
#include "carbondate/time.hpp"
#include "carbondate/uri.hpp"
#include "carbondate/world.hpp"

namespace carbondate {

/// A URI with an independently verified creation day.
struct GoldRecord {
  CanonicalUri uri;
  DayDate real_date;
  std::string category;
};

/// Reads CSV with header "uri,real_date,category". Rejects rows whose date is
/// not "YYYY-MM-DD" or lies outside the window, and rows with bad URIs.
/// Throws FormatError listing every bad line.
std::vector<GoldRecord> load_gold(std::istream& in, const PlausibilityWindow& window);
std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const PlausibilityWindow& window);

/// Ground truth of a synthetic world as gold records (category "synthetic").
std::vector<GoldRecord> gold_from_world(const SyntheticWorld& world);

using DeltaMap = std::map<Method, std::optional<std::int64_t>>;

/// |real - day(est)| in whole days; nothing when there is no estimate.
std::optional<std::int64_t> method_delta(DayDate real, std::optional<UtcTimestamp> est);

struct BestDelta {
  std::optional<std::int64_t> days;
  std::optional<Method> winner;
};

/// Minimum over present deltas of methods not in `disabled`; ties go to the
/// method earlier in kTieBreakOrder.
BestDelta best_delta(const DeltaMap& deltas, const std::set<Method>& disabled = {});

struct EvalRecord {
  GoldRecord gold;
  std::map<Method, std::optional<UtcTimestamp>> estimates;
  DeltaMap deltas;
  std::optional<std::int64_t> best;
  std::optional<Method> winner;
  /// |real - day(min estimate)|; equals `best` whenever no estimate precedes the real day.
  std::optional<std::int64_t> estimate_delta;
};

EvalRecord evaluate(const GoldRecord& gold, const std::vector<EvidenceResult>& evidence);

nlohmann::ordered_json to_json(const EvalRecord& r);

enum class AucAxis {
  normalized,  // x = i / (n - 1) on [0, 1]
  raw_index,   // x = i on [0, n - 1]
};

struct AucParts {
  double trapezoid = 0.0;
  double simpson = 0.0;
  double average() const { return 0.5 * (trapezoid + simpson); }
};

inline constexpr double kAucSpacing = 0.0001;

/// Sorts the deltas, linearly interpolates between them over the chosen
/// axis, and integrates with composite trapezoid and composite Simpson rules
/// at the given spacing. Throws EmptyInput.
AucParts auc_parts(std::span<const std::int64_t> deltas, AucAxis axis = AucAxis::normalized,
                   double spacing = kAucSpacing);

/// Mean of the two rules.
double auc(std::span<const std::int64_t> deltas, AucAxis axis = AucAxis::normalized,
           double spacing = kAucSpacing);

struct Polyfit2 {
  double a = 0.0;  // x^2
  double b = 0.0;  // x
  double c = 0.0;  // 1
  double residual_norm = 0.0;

  double operator()(double x) const { return (a * x + b) * x + c; }
};

/// Least-squares y ~ a x^2 + b x + c via the normal equations.
/// Throws DegenerateInput when fewer than three distinct x values exist.
Polyfit2 polyfit2(std::span<const std::pair<double, double>> points);

struct AblationResult {
  Method disabled;
  std::size_t estimated_count = 0;
  std::optional<double> auc;
  /// (auc_full - auc) / auc_full * 100.
  std::optional<double> percent_lost;
  std::optional<double> mean_best_delta;
};

/// Recomputes every record's best delta with `disabled` excluded.
AblationResult ablate(std::span<const EvalRecord> records, Method disabled, std::optional<double> auc_full,
                      AucAxis axis = AucAxis::normalized);

struct MethodStats {
  std::size_t best = 0;         // records this method won
  std::size_t contributed = 0;  // records this method produced any estimate for
};

struct EvalSummary {
  std::size_t n = 0;
  std::size_t estimated_count = 0;
  std::size_t exact_count = 0;
  std::map<Method, MethodStats> per_method;
  std::optional<double> auc_full;
  std::optional<double> mean_best_delta;
  std::vector<AblationResult> ablations;
  std::optional<Polyfit2> delta_fit;     // (normalized index, sorted delta days)
  std::optional<Polyfit2> estimate_fit;  // (normalized index by real date, days since 1995 of estimate)
  std::optional<Polyfit2> real_fit;      // (normalized index by real date, days since 1995 of real date)

  double estimated_fraction() const { return n ? static_cast<double>(estimated_count) / n : 0.0; }
  double exact_fraction() const { return n ? static_cast<double>(exact_count) / n : 0.0; }
};

/// Aggregates records; ablates each method in `ablations` (all six when empty).
EvalSummary summarize(std::span<const EvalRecord> records, const std::vector<Method>& ablations = {},
                      AucAxis axis = AucAxis::normalized);

/// Table-shaped report: one row per method with best counts, share of found
/// resources, contribution counts and share, ablated AUC and percent lost,
/// plus a total row.
nlohmann::ordered_json to_json(const EvalSummary& s);

/// Best deltas of estimated records, ascending.
std::vector<std::int64_t> sorted_best_deltas(std::span<const EvalRecord> records);

}  // namespace carbondate
