#include "carbondate/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "carbondate/error.hpp"

namespace carbondate {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<UtcTimestamp> earliest(const std::map<Method, std::optional<UtcTimestamp>>& estimates) {
  std::optional<UtcTimestamp> best;
  for (const auto& [m, t] : estimates)
    if (t && (!best || *t < *best)) best = t;
  return best;
}

double percent(std::size_t part, std::size_t whole) {
  return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

std::optional<double> mean(std::span<const std::int64_t> v) {
  if (v.empty()) return std::nullopt;
  long double sum = 0;
  for (auto d : v) sum += static_cast<long double>(d);
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

std::optional<Polyfit2> try_fit(const std::vector<std::pair<double, double>>& points) {
  try {
    return polyfit2(points);
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }
}

double normalized_index(std::size_t i, std::size_t n) {
  return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
}

// Summary row order and labels.
constexpr std::array<std::pair<Method, const char*>, 6> kTableRows = {{{Method::shortener, "Bitly"},
                                                                       {Method::search_index, "Google"},
                                                                       {Method::social, "Topsy"},
                                                                       {Method::archives, "Archives"},
                                                                       {Method::backlinks, "Backlinks"},
                                                                       {Method::last_modified, "Last Modified"}}};

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json fit_json(const std::optional<Polyfit2>& f) {
  if (!f) return nullptr;
  return {{"a", f->a}, {"b", f->b}, {"c", f->c}, {"residual_norm", f->residual_norm}};
}

}  // namespace

std::vector<GoldRecord> load_gold(std::istream& in, const PlausibilityWindow& window) {
  std::vector<GoldRecord> records;
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 3 || fields[0] != "uri" || fields[1] != "real_date" || fields[2] != "category")
        problems.push_back("line " + std::to_string(line_no) + ": expected header uri,real_date,category");
      continue;
    }
    if (fields.size() != 3) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 3 fields");
      continue;
    }
    auto uri = try_normalize_uri(fields[0]);
    if (!uri) {
      problems.push_back("line " + std::to_string(line_no) + ": malformed URI '" + std::string(fields[0]) + "'");
      continue;
    }
    DayDate date;
    try {
      date = parse_iso_date(fields[1]);
    } catch (const UnparsableDate&) {
      problems.push_back("line " + std::to_string(line_no) + ": real_date '" + std::string(fields[1]) +
                         "' is not YYYY-MM-DD");
      continue;
    }
    if (!window.contains(start_of_day(date))) {
      problems.push_back("line " + std::to_string(line_no) + ": real_date " + std::string(fields[1]) +
                         " outside the plausibility window");
      continue;
    }
    records.push_back(GoldRecord{*std::move(uri), date, std::string(fields[2])});
  }
  if (!header_seen) problems.push_back("empty gold file");
  if (!problems.empty()) {
    std::string msg = "gold file rejected:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw FormatError(msg);
  }
  return records;
}

std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const PlausibilityWindow& window) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open gold file " + path.string());
  return load_gold(in, window);
}

std::vector<GoldRecord> gold_from_world(const SyntheticWorld& world) {
  std::vector<GoldRecord> out;
  out.reserve(world.resources.size());
  for (const auto& r : world.resources) out.push_back(GoldRecord{r.uri, truncate_to_day(r.true_creation), "synthetic"});
  return out;
}

std::optional<std::int64_t> method_delta(DayDate real, std::optional<UtcTimestamp> est) {
  if (!est) return std::nullopt;
  auto d = days_between(real, truncate_to_day(*est));
  return d < 0 ? -d : d;
}

BestDelta best_delta(const DeltaMap& deltas, const std::set<Method>& disabled) {
  BestDelta best;
  for (const auto& [m, d] : deltas) {
    if (!d || disabled.count(m)) continue;
    if (!best.days || *d < *best.days || (*d == *best.days && tie_break_rank(m) < tie_break_rank(*best.winner))) {
      best.days = d;
      best.winner = m;
    }
  }
  return best;
}

EvalRecord evaluate(const GoldRecord& gold, const std::vector<EvidenceResult>& evidence) {
  EvalRecord r;
  r.gold = gold;
  for (const auto& e : evidence) {
    std::optional<UtcTimestamp> est;
    if (e.status == Status::ok) est = e.estimate;
    r.estimates[e.method] = est;
    r.deltas[e.method] = method_delta(gold.real_date, est);
  }
  auto best = best_delta(r.deltas);
  r.best = best.days;
  r.winner = best.winner;
  r.estimate_delta = method_delta(gold.real_date, earliest(r.estimates));
  return r;
}

ordered_json to_json(const EvalRecord& r) {
  ordered_json j;
  j["uri"] = r.gold.uri.str();
  j["real_date"] = format_iso_date(r.gold.real_date);
  j["category"] = r.gold.category;
  ordered_json estimates = ordered_json::object();
  ordered_json deltas = ordered_json::object();
  for (Method m : kAllMethods) {
    auto e = r.estimates.find(m);
    if (e == r.estimates.end()) continue;
    estimates[std::string(method_name(m))] = e->second ? ordered_json(format_iso_timestamp(*e->second)) : nullptr;
    auto d = r.deltas.at(m);
    deltas[std::string(method_name(m))] = d ? ordered_json(*d) : nullptr;
  }
  j["estimates"] = estimates;
  j["deltas"] = deltas;
  j["best_delta"] = r.best ? ordered_json(*r.best) : nullptr;
  j["winning_method"] = r.winner ? ordered_json(std::string(method_name(*r.winner))) : nullptr;
  j["estimate_delta"] = r.estimate_delta ? ordered_json(*r.estimate_delta) : nullptr;
  return j;
}

AucParts auc_parts(std::span<const std::int64_t> deltas, AucAxis axis, double spacing) {
  if (deltas.empty()) throw EmptyInput("auc: no deltas");
  if (!(spacing > 0.0)) throw std::invalid_argument("auc: spacing must be positive");

  std::vector<std::int64_t> sorted(deltas.begin(), deltas.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<std::int64_t>(sorted.size());

  // A single point is a constant curve over a unit interval.
  const double length = (axis == AucAxis::raw_index && n > 1) ? static_cast<double>(n - 1) : 1.0;
  auto steps = static_cast<std::int64_t>(std::llround(length / spacing));
  steps = std::max<std::int64_t>(steps, 2);
  if (steps % 2) ++steps;  // Simpson needs an even panel count
  const double h = length / static_cast<double>(steps);
  const std::int64_t segments = std::max<std::int64_t>(n - 1, 0);

  // Grid point k sits at sorted-index position k * segments / steps; integer
  // arithmetic keeps nodes that coincide with data points exact.
  auto curve = [&](std::int64_t k) -> double {
    if (segments == 0) return static_cast<double>(sorted[0]);
    std::int64_t num = k * segments;
    std::int64_t idx = num / steps;
    std::int64_t rem = num % steps;
    if (rem == 0) return static_cast<double>(sorted[static_cast<std::size_t>(idx)]);
    double frac = static_cast<double>(rem) / static_cast<double>(steps);
    double lo = static_cast<double>(sorted[static_cast<std::size_t>(idx)]);
    double hi = static_cast<double>(sorted[static_cast<std::size_t>(idx + 1)]);
    return lo + (hi - lo) * frac;
  };

  long double ends = static_cast<long double>(curve(0)) + curve(steps);
  long double odd = 0, even = 0;
  for (std::int64_t k = 1; k < steps; ++k) (k % 2 ? odd : even) += curve(k);

  AucParts parts;
  parts.trapezoid = static_cast<double>(h * (ends / 2 + odd + even));
  parts.simpson = static_cast<double>(h / 3 * (ends + 4 * odd + 2 * even));
  return parts;
}

double auc(std::span<const std::int64_t> deltas, AucAxis axis, double spacing) {
  return auc_parts(deltas, axis, spacing).average();
}

Polyfit2 polyfit2(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DegenerateInput("polyfit2: need at least three points");
  std::vector<double> xs;
  for (const auto& p : points) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3)
    throw DegenerateInput("polyfit2: need at least three distinct x values");

  // Fit in centered, scaled coordinates u = (x - shift) / scale, then map back.
  double shift = 0, scale = 0;
  for (const auto& p : points) shift += p.first;
  shift /= static_cast<double>(points.size());
  for (const auto& p : points) scale = std::max(scale, std::abs(p.first - shift));

  long double s[5] = {0, 0, 0, 0, 0};  // sums of u^k
  long double t[3] = {0, 0, 0};        // sums of u^k y
  for (const auto& [x, y] : points) {
    long double u = (x - shift) / scale;
    long double uk = 1;
    for (int k = 0; k < 5; ++k) {
      s[k] += uk;
      if (k < 3) t[k] += uk * y;
      uk *= u;
    }
  }
  // Unknowns ordered (c', b', a').
  long double m[3][4] = {{s[0], s[1], s[2], t[0]}, {s[1], s[2], s[3], t[1]}, {s[2], s[3], s[4], t[2]}};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-12L * s[0]) throw DegenerateInput("polyfit2: normal equations are singular");
    if (pivot != col)
      for (int k = 0; k < 4; ++k) std::swap(m[col][k], m[pivot][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      long double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  long double c1 = m[0][3] / m[0][0];
  long double b1 = m[1][3] / m[1][1];
  long double a1 = m[2][3] / m[2][2];

  long double sc = scale, sh = shift;
  Polyfit2 fit;
  fit.a = static_cast<double>(a1 / (sc * sc));
  fit.b = static_cast<double>(b1 / sc - 2 * a1 * sh / (sc * sc));
  fit.c = static_cast<double>(a1 * sh * sh / (sc * sc) - b1 * sh / sc + c1);

  long double rss = 0;
  for (const auto& [x, y] : points) {
    long double u = (x - shift) / scale;
    long double r = y - ((a1 * u + b1) * u + c1);
    rss += r * r;
  }
  fit.residual_norm = static_cast<double>(std::sqrt(rss));
  return fit;
}

std::vector<std::int64_t> sorted_best_deltas(std::span<const EvalRecord> records) {
  std::vector<std::int64_t> out;
  for (const auto& r : records)
    if (r.best) out.push_back(*r.best);
  std::sort(out.begin(), out.end());
  return out;
}

AblationResult ablate(std::span<const EvalRecord> records, Method disabled, std::optional<double> auc_full,
                      AucAxis axis) {
  AblationResult out{disabled, 0, std::nullopt, std::nullopt, std::nullopt};
  std::vector<std::int64_t> deltas;
  for (const auto& r : records) {
    auto best = best_delta(r.deltas, {disabled});
    if (best.days) deltas.push_back(*best.days);
  }
  out.estimated_count = deltas.size();
  out.mean_best_delta = mean(deltas);
  if (!deltas.empty()) out.auc = auc(deltas, axis);
  if (auc_full && out.auc) {
    if (*auc_full != 0.0)
      out.percent_lost = (*auc_full - *out.auc) / *auc_full * 100.0;
    else if (*out.auc == 0.0)
      out.percent_lost = 0.0;
  }
  return out;
}

EvalSummary summarize(std::span<const EvalRecord> records, const std::vector<Method>& ablations, AucAxis axis) {
  EvalSummary s;
  s.n = records.size();
  for (Method m : kAllMethods) s.per_method[m] = {};
  for (const auto& r : records) {
    if (r.best) ++s.estimated_count;
    if (r.best && *r.best == 0) ++s.exact_count;
    if (r.winner) ++s.per_method[*r.winner].best;
    for (const auto& [m, t] : r.estimates)
      if (t) ++s.per_method[m].contributed;
  }

  auto deltas = sorted_best_deltas(records);
  s.mean_best_delta = mean(deltas);
  if (!deltas.empty()) s.auc_full = auc(deltas, axis);

  std::vector<Method> to_ablate = ablations;
  if (to_ablate.empty()) to_ablate.assign(kAllMethods.begin(), kAllMethods.end());
  for (Method m : to_ablate) s.ablations.push_back(ablate(records, m, s.auc_full, axis));

  std::vector<std::pair<double, double>> delta_points;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    delta_points.emplace_back(normalized_index(i, deltas.size()), static_cast<double>(deltas[i]));
  s.delta_fit = try_fit(delta_points);

  std::vector<const EvalRecord*> by_real;
  for (const auto& r : records) by_real.push_back(&r);
  std::sort(by_real.begin(), by_real.end(), [](const EvalRecord* a, const EvalRecord* b) {
    auto da = std::chrono::sys_days{a->gold.real_date}, db = std::chrono::sys_days{b->gold.real_date};
    return da != db ? da < db : a->gold.uri < b->gold.uri;
  });
  const DayDate epoch = truncate_to_day(kEarliestPlausible);
  std::vector<std::pair<double, double>> real_points, estimate_points;
  std::vector<const EvalRecord*> estimated;
  for (const auto* r : by_real)
    if (earliest(r->estimates)) estimated.push_back(r);
  for (std::size_t i = 0; i < by_real.size(); ++i)
    real_points.emplace_back(normalized_index(i, by_real.size()),
                             static_cast<double>(days_between(epoch, by_real[i]->gold.real_date)));
  for (std::size_t i = 0; i < estimated.size(); ++i)
    estimate_points.emplace_back(
        normalized_index(i, estimated.size()),
        static_cast<double>(days_between(epoch, truncate_to_day(*earliest(estimated[i]->estimates)))));
  s.real_fit = try_fit(real_points);
  s.estimate_fit = try_fit(estimate_points);
  return s;
}

ordered_json to_json(const EvalSummary& s) {
  ordered_json j;
  j["n"] = s.n;
  j["estimated_count"] = s.estimated_count;
  j["estimated_percent"] = percent(s.estimated_count, s.n);
  j["exact_count"] = s.exact_count;
  j["exact_percent"] = percent(s.exact_count, s.n);
  j["auc"] = optional_number(s.auc_full);
  j["mean_best_delta"] = optional_number(s.mean_best_delta);

  ordered_json rows = ordered_json::array();
  for (const auto& [m, label] : kTableRows) {
    const auto& stats = s.per_method.at(m);
    ordered_json row;
    row["method"] = method_name(m);
    row["label"] = label;
    row["found_by_best"] = stats.best;
    row["found_percent"] = percent(stats.best, s.estimated_count);
    row["contributed"] = stats.contributed;
    row["contributed_percent"] = percent(stats.contributed, s.n);
    auto ab = std::find_if(s.ablations.begin(), s.ablations.end(), [m = m](const auto& a) { return a.disabled == m; });
    if (ab != s.ablations.end()) {
      row["auc_without"] = optional_number(ab->auc);
      row["percent_lost_in_auc"] = optional_number(ab->percent_lost);
      row["estimated_without"] = ab->estimated_count;
      row["mean_best_delta_without"] = optional_number(ab->mean_best_delta);
    } else {
      row["auc_without"] = nullptr;
      row["percent_lost_in_auc"] = nullptr;
    }
    rows.push_back(row);
  }
  j["methods"] = rows;

  ordered_json total;
  total["found_by_best"] = s.estimated_count;
  total["found_percent"] = percent(s.estimated_count, s.n);
  total["contributed"] = s.estimated_count;
  total["contributed_percent"] = percent(s.estimated_count, s.n);
  total["auc"] = optional_number(s.auc_full);
  total["percent_lost_in_auc"] = s.auc_full ? ordered_json(0.0) : ordered_json(nullptr);
  j["total"] = total;

  j["fits"] = {{"delta_curve", fit_json(s.delta_fit)},
               {"estimate_curve", fit_json(s.estimate_fit)},
               {"real_curve", fit_json(s.real_fit)}};
  return j;
}

}  // namespace carbondate
